"""Analytic floating-point operation accounting.

Costs are modeled, not measured: each instrumented operation adds a
deterministic count of real multiply/add/divide/transcendental ops so
that two identical runs always report identical numbers.
"""

import math
import threading


class OpCounter:
    """Cumulative FLOP counter with per-stage attribution.

    Thread-safe: `add` may be called concurrently from workers that share
    one counter. Counts only grow; call `reset` between runs.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._stages = {}

    def add(self, stage, flops):
        if flops < 0:
            raise ValueError("flop increments must be non-negative")
        n = int(round(flops))
        with self._lock:
            self._stages[stage] = self._stages.get(stage, 0) + n

    @property
    def total(self):
        with self._lock:
            return sum(self._stages.values())

    def per_stage(self):
        """Snapshot of {stage: flops}."""
        with self._lock:
            return dict(self._stages)

    def stage(self, name):
        with self._lock:
            return self._stages.get(name, 0)

    def reset(self):
        with self._lock:
            self._stages.clear()

    def __repr__(self):
        return f"OpCounter(total={self.total}, stages={self.per_stage()})"


def fft_flops(n):
    """Analytic cost of one real-input FFT of length n (2.5 n log2 n)."""
    if n < 2:
        return 0
    return int(round(2.5 * n * math.log2(n)))
