"""GRU inference with a linear + sigmoid head.

Recurrence, with update gate z, reset gate r and candidate state n
(hidden state starts at zero; the recurrent bias of the candidate is
gated by r, so weights exported from common frameworks map directly):

    z  = sigmoid(Wz x + bz + Uz h + cz)
    r  = sigmoid(Wr x + br + Ur h + cr)
    n  = tanh(Wn x + bn + r * (Un h + cn))
    h' = (1 - z) * h + z * n

Per layer the gate weights are stacked in z, r, n order: w_in is
(3h, in), w_rec is (3h, h), and b_in / b_rec are the two bias vectors.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


@dataclass
class GruLayer:
    w_in: np.ndarray
    w_rec: np.ndarray
    b_in: np.ndarray
    b_rec: np.ndarray

    def __post_init__(self):
        h3, inp = self.w_in.shape
        if h3 % 3 != 0:
            raise ValueError("stacked gate weights must have 3*hidden rows")
        h = h3 // 3
        if self.w_rec.shape != (h3, h):
            raise ValueError("recurrent weights must be (3*hidden, hidden)")
        if self.b_in.shape != (h3,) or self.b_rec.shape != (h3,):
            raise ValueError("biases must be (3*hidden,)")

    @property
    def input_size(self):
        return self.w_in.shape[1]

    @property
    def hidden_size(self):
        return self.w_in.shape[0] // 3


@dataclass
class GruNetwork:
    layers: list
    head_w: np.ndarray
    head_b: np.ndarray

    def __post_init__(self):
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if nxt.input_size != prev.hidden_size:
                raise ValueError("consecutive layer dimensions do not chain")
        if self.head_w.ndim != 2 or self.head_b.shape != (self.head_w.shape[0],):
            raise ValueError("head must be a (out, in) matrix with (out,) bias")
        if self.layers and self.head_w.shape[1] != self.layers[-1].hidden_size:
            raise ValueError("head input size must equal the last hidden size")

    @property
    def input_size(self):
        return self.layers[0].input_size if self.layers else self.head_w.shape[1]

    @property
    def output_size(self):
        return self.head_w.shape[0]


def parameter_count(net):
    """Analytic weight-scalar count:
    sum over layers of 3*(in*h + h*h + 2h), plus head in*out + out."""
    total = 0
    for layer in net.layers:
        i, h = layer.input_size, layer.hidden_size
        total += 3 * (i * h + h * h + 2 * h)
    out, head_in = net.head_w.shape
    return total + head_in * out + out


def step_flops(net):
    """Modeled cost of one inference step (two matvecs plus elementwise
    gate math per layer, then the head)."""
    total = 0
    for layer in net.layers:
        i, h = layer.input_size, layer.hidden_size
        total += 6 * h * (i + h) + 11 * h
    out, head_in = net.head_w.shape
    return total + 2 * out * head_in + 2 * out


class GruStream:
    """Stateful per-stream runner; feed frames one at a time."""

    def __init__(self, net):
        self.net = net
        self.reset()

    def reset(self):
        self.hidden = [np.zeros(layer.hidden_size) for layer in self.net.layers]

    def step(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.net.input_size,):
            raise ValueError(f"feature dimension {x.shape} does not match "
                             f"network input size {self.net.input_size}")
        for i, layer in enumerate(self.net.layers):
            h = self.hidden[i]
            hs = layer.hidden_size
            gi = layer.w_in @ x + layer.b_in
            gr = layer.w_rec @ h + layer.b_rec
            z = _sigmoid(gi[:hs] + gr[:hs])
            r = _sigmoid(gi[hs:2 * hs] + gr[hs:2 * hs])
            n = np.tanh(gi[2 * hs:] + r * gr[2 * hs:])
            x = (1.0 - z) * h + z * n
            self.hidden[i] = x
        return _sigmoid(self.net.head_w @ x + self.net.head_b)


def gru_forward(net, features, counter=None, stage="gru"):
    """Run the network over a (frames, input_size) feature sequence.

    Returns a (frames, output_size) array of sigmoid outputs in (0, 1).
    """
    feats = np.asarray(features, dtype=np.float64)
    if feats.ndim == 1:
        feats = feats[:, np.newaxis]
    if feats.ndim != 2 or feats.shape[1] != net.input_size:
        raise ValueError(f"feature dimension {feats.shape} does not match "
                         f"network input size {net.input_size}")
    stream = GruStream(net)
    out = np.empty((feats.shape[0], net.output_size))
    for t in range(feats.shape[0]):
        out[t] = stream.step(feats[t])
    if counter is not None:
        counter.add(stage, feats.shape[0] * step_flops(net))
    return out


def zeros_network(input_size, hidden_sizes, output_size):
    """All-zero parameters; every head output is sigmoid(0) = 0.5."""
    layers = []
    prev = input_size
    for h in hidden_sizes:
        layers.append(GruLayer(np.zeros((3 * h, prev)), np.zeros((3 * h, h)),
                               np.zeros(3 * h), np.zeros(3 * h)))
        prev = h
    return GruNetwork(layers, np.zeros((output_size, prev)), np.zeros(output_size))


def random_network(input_size, hidden_sizes, output_size, seed=0):
    """Deterministic random initialization (untrained; for plumbing and
    benchmarks, not for meaningful predictions)."""
    rng = np.random.default_rng(seed)
    layers = []
    prev = input_size
    for h in hidden_sizes:
        s_in = 1.0 / np.sqrt(max(prev, 1))
        s_rec = 1.0 / np.sqrt(h)
        layers.append(GruLayer(rng.uniform(-s_in, s_in, (3 * h, prev)),
                               rng.uniform(-s_rec, s_rec, (3 * h, h)),
                               rng.uniform(-s_rec, s_rec, 3 * h),
                               rng.uniform(-s_rec, s_rec, 3 * h)))
        prev = h
    s = 1.0 / np.sqrt(max(prev, 1))
    return GruNetwork(layers, rng.uniform(-s, s, (output_size, prev)),
                      rng.uniform(-s, s, output_size))


def _tensor_list(net):
    tensors = []
    for i, layer in enumerate(net.layers):
        tensors += [(f"layer{i}.w_in", layer.w_in), (f"layer{i}.w_rec", layer.w_rec),
                    (f"layer{i}.b_in", layer.b_in), (f"layer{i}.b_rec", layer.b_rec)]
    tensors += [("head.w", net.head_w), ("head.b", net.head_b)]
    return tensors


def save_weights(net, manifest_path):
    """Write a JSON manifest plus a little-endian float32 blob.

    The blob sits next to the manifest with a .bin suffix and holds the
    tensors row-major, concatenated in manifest order, so networks
    trained in any framework can be exported to this layout.
    """
    manifest_path = Path(manifest_path)
    blob_path = manifest_path.with_suffix(".bin")
    tensors = _tensor_list(net)
    manifest = {
        "format": "gru-weights-v1",
        "blob": blob_path.name,
        "input_size": net.input_size,
        "hidden_sizes": [layer.hidden_size for layer in net.layers],
        "head_input_size": int(net.head_w.shape[1]),
        "output_size": net.output_size,
        "tensors": [{"name": name, "shape": list(a.shape)} for name, a in tensors],
    }
    with open(blob_path, "wb") as f:
        for _, a in tensors:
            f.write(np.ascontiguousarray(a, dtype="<f4").tobytes())
    with open(manifest_path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


def load_weights(manifest_path):
    """Load a network written by `save_weights`."""
    manifest_path = Path(manifest_path)
    with open(manifest_path, encoding="utf-8") as f:
        manifest = json.load(f)
    if manifest.get("format") != "gru-weights-v1":
        raise ValueError(f"unrecognized weights format in {manifest_path}")
    blob = np.fromfile(manifest_path.parent / manifest["blob"], dtype="<f4")
    arrays = []
    offset = 0
    for spec in manifest["tensors"]:
        size = int(np.prod(spec["shape"])) if spec["shape"] else 1
        if offset + size > blob.size:
            raise ValueError("weights blob is shorter than the manifest declares")
        arrays.append(blob[offset:offset + size].astype(np.float64)
                      .reshape(spec["shape"]))
        offset += size
    if offset != blob.size:
        raise ValueError("weights blob is longer than the manifest declares")
    layers = []
    for i in range(len(manifest["hidden_sizes"])):
        layers.append(GruLayer(*arrays[4 * i:4 * i + 4]))
    return GruNetwork(layers, arrays[-2], arrays[-1])
