"""Steered-beamformer sound source localization projected on the image
plane: steering grids from a pinhole camera model, recursive masked
PHAT cross-spectra, exact SRP-PHAT evaluation and its low-rank SVD
acceleration."""

import itertools
from dataclasses import dataclass, field

import numpy as np

SPEED_OF_SOUND = 343.0

# Modeled per-element costs (real flops): recursive cross-spectrum
# update per pair/bin; steered-power accumulation per matrix element;
# complex multiply-accumulate for the low-rank projection.
CROSS_SPECTRUM_FLOPS_PER_BIN = 26
SRP_FLOPS_PER_ELEMENT = 4
PROJECTION_FLOPS_PER_ELEMENT = 8


@dataclass(frozen=True)
class ArrayGeometry:
    """Microphone coordinates (meters) in the camera frame: x right,
    y down, z along the optical axis."""

    mic_positions: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.mic_positions, dtype=np.float64)
        if pos.ndim != 2 or pos.shape[1] != 3 or pos.shape[0] < 2:
            raise ValueError("need at least two microphones with 3-D positions")
        for i, j in itertools.combinations(range(pos.shape[0]), 2):
            if np.linalg.norm(pos[i] - pos[j]) < 1e-9:
                raise ValueError(f"degenerate geometry: mics {i} and {j} coincide")
        pos.flags.writeable = False
        object.__setattr__(self, "mic_positions", pos)

    @property
    def num_mics(self):
        return self.mic_positions.shape[0]

    @property
    def pair_list(self):
        return list(itertools.combinations(range(self.num_mics), 2))

    @property
    def num_pairs(self):
        m = self.num_mics
        return m * (m - 1) // 2

    @classmethod
    def square(cls, side=0.064):
        """Four mics at the corners of a square parallel to the image
        plane, centered on the optical axis."""
        h = side / 2.0
        return cls(np.array([[-h, -h, 0.0], [h, -h, 0.0],
                             [-h, h, 0.0], [h, h, 0.0]]))


@dataclass(frozen=True)
class CameraModel:
    """Pinhole camera with square pixels."""

    image_width: int = 640
    image_height: int = 480
    fov_h_deg: float = 60.0

    def __post_init__(self):
        if self.image_width < 1 or self.image_height < 1:
            raise ValueError("image dimensions must be positive")
        if not 0.0 < self.fov_h_deg < 180.0:
            raise ValueError("horizontal FOV must lie in (0, 180) degrees")

    @property
    def focal_px(self):
        return (self.image_width / 2.0) / np.tan(np.radians(self.fov_h_deg) / 2.0)

    def pixel_to_direction(self, x, y):
        """Far-field unit direction through a pixel."""
        d = np.array([(x - self.image_width / 2.0) / self.focal_px,
                      (y - self.image_height / 2.0) / self.focal_px,
                      1.0])
        return d / np.linalg.norm(d)


@dataclass(frozen=True)
class SteeringGrid:
    """Camera-projected steering regions with per-pair TDOAs in samples.

    Regions are indexed (col, row); the flat index is row-major
    (row * grid_w + col). tdoas is shaped (regions, pairs).
    """

    geometry: ArrayGeometry
    camera: CameraModel
    grid_w: int
    grid_h: int
    sample_rate: int
    directions: np.ndarray = field(repr=False)
    tdoas: np.ndarray = field(repr=False)

    @property
    def num_regions(self):
        return self.grid_w * self.grid_h


def build_grid(geometry, camera=CameraModel(), grid_w=9, grid_h=7,
               sample_rate=16000):
    """Build the steering grid for a mic geometry and camera.

    Each region center pixel maps through the inverse pinhole model to
    a far-field unit direction u; for a mic pair (i, j) the steering
    delay is (r_j - r_i) . u / c, expressed in samples.
    """
    if grid_w < 1 or grid_h < 1:
        raise ValueError("grid dimensions must be at least 1x1")
    pos = geometry.mic_positions
    pairs = geometry.pair_list
    directions = np.empty((grid_w * grid_h, 3))
    tdoas = np.empty((grid_w * grid_h, len(pairs)))
    for row in range(grid_h):
        for col in range(grid_w):
            q = row * grid_w + col
            px = (col + 0.5) * camera.image_width / grid_w
            py = (row + 0.5) * camera.image_height / grid_h
            u = camera.pixel_to_direction(px, py)
            directions[q] = u
            for p, (i, j) in enumerate(pairs):
                tdoas[q, p] = (pos[j] - pos[i]) @ u / SPEED_OF_SOUND * sample_rate
    directions.flags.writeable = False
    tdoas.flags.writeable = False
    return SteeringGrid(geometry, camera, grid_w, grid_h, int(sample_rate),
                        directions, tdoas)


def region_to_pixel(grid, region):
    """Center pixel (x, y) of a region given as (col, row)."""
    col, row = region
    if not (0 <= col < grid.grid_w and 0 <= row < grid.grid_h):
        raise IndexError(f"region {region} outside the {grid.grid_w}x{grid.grid_h} grid")
    return ((col + 0.5) * grid.camera.image_width / grid.grid_w,
            (row + 0.5) * grid.camera.image_height / grid.grid_h)


def pixel_to_region(grid, x, y):
    """Region (col, row) whose cell contains the pixel."""
    col = min(grid.grid_w - 1, max(0, int(x * grid.grid_w / grid.camera.image_width)))
    row = min(grid.grid_h - 1, max(0, int(y * grid.grid_h / grid.camera.image_height)))
    return (col, row)


class CrossSpectrumState:
    """Recursively averaged masked PHAT cross-spectra, one complex
    vector per mic pair. Updates are strictly sequential per stream."""

    def __init__(self, cross, alpha, frame_size):
        cross = np.asarray(cross, dtype=np.complex128)
        if cross.ndim != 2:
            raise ValueError("cross-spectra must be shaped (pairs, bins)")
        if not 0.0 < alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        self.cross = cross
        self.alpha = float(alpha)
        self.frame_size = int(frame_size)

    @classmethod
    def initial(cls, num_pairs, num_bins, frame_size, alpha=0.2):
        return cls(np.zeros((num_pairs, num_bins), dtype=np.complex128),
                   alpha, frame_size)

    @property
    def num_pairs(self):
        return self.cross.shape[0]

    @property
    def num_bins(self):
        return self.cross.shape[1]


def update_cross_spectra(state, spec, frame, pairs, mask=None, counter=None,
                         stage="ssl"):
    """One recursive update from spectrogram frame `frame`.

    The instantaneous cross-spectrum of each pair is normalized to unit
    modulus (phase transform), weighted by the mask value of the bin,
    and blended into the average with rate alpha:

        X_ij <- (1 - alpha) X_ij + alpha * M[k] * Xi[k] Xj[k]* / |Xi||Xj|

    Bins where either magnitude is zero contribute nothing. Returns a
    new state; the input state is left untouched.
    """
    x = spec.bins[:, frame, :]
    if mask is None:
        m = 1.0
    else:
        m = mask.values[frame] if hasattr(mask, "values") else np.asarray(mask)
    i_idx = np.array([i for i, _ in pairs])
    j_idx = np.array([j for _, j in pairs])
    num = x[i_idx] * np.conj(x[j_idx])
    den = np.abs(x[i_idx]) * np.abs(x[j_idx])
    with np.errstate(invalid="ignore", divide="ignore"):
        inst = np.where(den > 0.0, num / den, 0.0)
    cross = (1.0 - state.alpha) * state.cross + state.alpha * m * inst
    if counter is not None:
        counter.add(stage, cross.size * CROSS_SPECTRUM_FLOPS_PER_BIN)
    return CrossSpectrumState(cross, state.alpha, state.frame_size)


def band_bin_indices(num_bins, frame_size, sample_rate, f_lo=100.0, f_hi=8000.0):
    """Indices of the frequency bins inside [f_lo, f_hi]."""
    k_lo = int(np.ceil(f_lo * frame_size / sample_rate))
    k_hi = min(num_bins - 1, int(np.floor(f_hi * frame_size / sample_rate)))
    if k_hi < k_lo:
        raise ValueError("frequency band contains no bins")
    return np.arange(k_lo, k_hi + 1)


def steering_matrix(grid, num_bins, frame_size, f_lo=100.0, f_hi=8000.0):
    """Complex steering phasors, shaped (regions, pairs * band_bins).

    Element (q, p*B + b) is exp(+2j pi k_b tdoa_qp / frame_size); the
    steered power of region q is the real part of the row's dot product
    with the cross-spectrum supervector.
    """
    bins = band_bin_indices(num_bins, frame_size, grid.sample_rate, f_lo, f_hi)
    phase = 2.0 * np.pi * grid.tdoas[:, :, np.newaxis] * bins / frame_size
    d = np.exp(1j * phase)  # (regions, pairs, B)
    return d.reshape(grid.num_regions, -1), bins


def supervector(state, band_bins):
    """Flatten the in-band cross-spectra of all pairs into one vector."""
    return state.cross[:, band_bins].reshape(-1)


@dataclass
class AcousticImage:
    """Steered power per region with the argmax; ties break to the
    lowest row-major region index."""

    energies: np.ndarray
    argmax_region: tuple
    frame: int = 0

    @classmethod
    def from_energies(cls, energies, grid_w, frame=0):
        energies = np.asarray(energies, dtype=np.float64)
        flat = int(np.argmax(energies))
        return cls(energies.reshape(-1, grid_w),
                   (flat % grid_w, flat // grid_w), frame)


def srp_phat_exact(state, grid, f_lo=100.0, f_hi=8000.0, counter=None,
                   stage="ssl", frame=0):
    """Exact steered response power with phase transform over the grid.

    energy(q) = sum over pairs and in-band bins of
                Re(X_ij[k] exp(+2j pi k tdoa_qp / frame_size))
    """
    d, bins = steering_matrix(grid, state.num_bins, state.frame_size, f_lo, f_hi)
    w = supervector(state, bins)
    energies = d.real @ w.real - d.imag @ w.imag
    if counter is not None:
        counter.add(stage, d.size * SRP_FLOPS_PER_ELEMENT)
    return AcousticImage.from_energies(energies, grid.grid_w, frame)


@dataclass
class SvdPhatModel:
    """Rank-truncated factorization of the steering matrix.

    `left` is U_R diag(s_R) (regions x R), `right` is V_R^H
    (R x pairs*bins); steered power is Re(left @ (right @ w)).
    """

    left: np.ndarray
    right: np.ndarray
    band_bins: np.ndarray
    rank: int
    delta: float
    achieved_error: float
    grid_w: int
    grid_h: int
    frame_size: int
    num_bins: int

    @property
    def num_regions(self):
        return self.grid_w * self.grid_h


def build_svd_model(grid, delta, num_bins, frame_size, f_lo=100.0, f_hi=8000.0):
    """Factor the steering matrix at the smallest rank whose relative
    Frobenius reconstruction error is <= delta.

    Args:
        grid: steering grid.
        delta: reconstruction tolerance in (0, inf).
        num_bins / frame_size: STFT dimensions of the cross-spectra the
            model will be applied to.

    Returns:
        SvdPhatModel ready for `srp_phat_svd`.
    """
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    d, bins = steering_matrix(grid, num_bins, frame_size, f_lo, f_hi)
    u, s, vh = np.linalg.svd(d, full_matrices=False)
    energy = s ** 2
    total = energy.sum()
    # Tail energy after keeping the first r singular values.
    tails = total - np.cumsum(energy)
    rel_err = np.sqrt(np.maximum(tails, 0.0) / total)
    candidates = np.nonzero(rel_err <= delta)[0]
    if candidates.size == 0:
        raise ValueError(f"delta={delta} unreachable even at full rank")
    rank = int(candidates[0]) + 1
    return SvdPhatModel(left=u[:, :rank] * s[:rank], right=vh[:rank],
                        band_bins=bins, rank=rank, delta=float(delta),
                        achieved_error=float(rel_err[rank - 1]),
                        grid_w=grid.grid_w, grid_h=grid.grid_h,
                        frame_size=int(frame_size), num_bins=int(num_bins))


def srp_phat_svd(model, state, counter=None, stage="ssl", frame=0):
    """Approximate steered power via the low-rank projection: project
    the cross-spectrum supervector with the right factor, then expand
    with the left factor and keep the real part."""
    if state.num_bins != model.num_bins or state.frame_size != model.frame_size:
        raise ValueError("state dimensions do not match the model")
    w = supervector(state, model.band_bins)
    z = model.right @ w
    energies = (model.left @ z).real
    if counter is not None:
        counter.add(stage, model.right.size * PROJECTION_FLOPS_PER_ELEMENT
                    + model.left.size * SRP_FLOPS_PER_ELEMENT)
    return AcousticImage.from_energies(energies, model.grid_w, frame)


def srp_exact_flops(grid, num_band_bins, num_pairs):
    """Modeled cost of one exact evaluation."""
    return grid.num_regions * num_pairs * num_band_bins * SRP_FLOPS_PER_ELEMENT


def srp_svd_flops(model):
    """Modeled cost of one low-rank evaluation."""
    return (model.right.size * PROJECTION_FLOPS_PER_ELEMENT
            + model.left.size * SRP_FLOPS_PER_ELEMENT)
