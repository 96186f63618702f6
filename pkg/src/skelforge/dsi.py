"""Dynamic skeletal interpolation.

A rotation sequence is cut into unit motions wherever the weighted angular
distance between neighbouring frames jumps over a threshold. Quiet stretches
("normal" intervals) are resampled with a fixed number of points, and each
jump ("edge" interval) gets a number of points proportional to its size.
Every piece is interpolated with componentwise Lagrange polynomials, then
noisy variants are drawn and each track is run through the supersmoother.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ExtrapolationError, StageError, ValidationError
from .quaternion import align_hemispheres, quat_angle, quat_conj, quat_mul
from .rotation import RotationSequence
from .seeding import derive_seed, make_rng
from .supersmoother import supersmooth

# guards Int() and ceil() against representation error, e.g. 10 * 0.5 / 0.2
_COUNT_EPS = 1e-9
MIN_PRENORM = 0.5
MAX_RESAMPLES = 16


@dataclass(frozen=True)
class DsiParams:
    threshold: float = 0.15
    delta: float = 0.2
    eta: float = 10.0
    variants: int = 4
    noise_low: float = -0.02
    noise_high: float = 0.02
    seed: int = 0
    spans: tuple[float, ...] = (0.05, 0.2, 0.5)
    max_degree: int = 7

    def __post_init__(self):
        object.__setattr__(self, "spans", tuple(float(s) for s in self.spans))
        if not 0 < self.delta <= 1:
            raise ValidationError("delta must lie in (0, 1]")
        if not self.eta > 0:
            raise ValidationError("eta must be positive")
        if not self.threshold >= 0:
            raise ValidationError("threshold must be nonnegative")
        if int(self.variants) != self.variants or self.variants < 1:
            raise ValidationError("variants must be a positive integer")
        if self.noise_low > self.noise_high:
            raise ValidationError("noise_low must not exceed noise_high")
        if not self.spans or any(not 0 < s < 1 for s in self.spans):
            raise ValidationError("spans must be a nonempty list of fractions in (0, 1)")
        if self.max_degree < 1:
            raise ValidationError("max_degree must be at least 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError("seed must be an unsigned 64-bit integer")

    @classmethod
    def from_dict(cls, doc: dict) -> "DsiParams":
        known = {k: doc[k] for k in cls.__dataclass_fields__ if k in doc}
        unknown = set(doc) - set(known)
        if unknown:
            raise ValidationError(f"unknown DSI parameter(s): {sorted(unknown)}")
        return cls(**known)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["spans"] = list(self.spans)
        return d


@dataclass(frozen=True)
class Interval:
    start: int
    end: int
    edge: bool = False
    distance: float = 0.0


@dataclass(frozen=True)
class Segmentation:
    intervals: tuple[Interval, ...]
    num_frames: int
    distances: np.ndarray = field(repr=False, compare=False, default=None)

    @property
    def boundaries(self) -> tuple[int, ...]:
        if not self.intervals:
            return (0,) if self.num_frames == 1 else (0, self.num_frames - 1)
        pts = {iv.start for iv in self.intervals} | {iv.end for iv in self.intervals}
        return tuple(sorted(pts))


@dataclass(frozen=True)
class AnimationSet:
    """``V`` variants of one animation: quaternions ``(V, J, F', 4)``."""

    fps: float
    root_positions: np.ndarray  # (V, F', 3)
    quaternions: np.ndarray  # (V, J, F', 4)
    seeds: tuple[int, ...] = ()
    joint_names: tuple[str, ...] | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.quaternions.shape

    @property
    def num_variants(self) -> int:
        return self.quaternions.shape[0]

    def variant(self, v: int) -> RotationSequence:
        return RotationSequence(self.fps, self.root_positions[v], self.quaternions[v], self.joint_names)

    @classmethod
    def from_sequences(cls, seqs, seeds=()) -> "AnimationSet":
        seqs = list(seqs)
        shapes = {s.quaternions.shape for s in seqs}
        if len(shapes) != 1:
            raise ValidationError(f"variants have mismatched shapes: {sorted(shapes)}")
        return cls(
            seqs[0].fps,
            np.stack([s.root_positions for s in seqs]),
            np.stack([s.quaternions for s in seqs]),
            tuple(seeds),
            seqs[0].joint_names,
        )


def angular_distance(frame_a, frame_b, weights) -> float:
    """Weighted mean over joints of the relative rotation angle, in radians.

    ``(1/J) * sum_b w_b * 2 arccos(|Re(q_a x conj(q_b))|)``, evaluated through
    the equivalent ``atan2`` form for accuracy near zero.
    """
    a = np.asarray(frame_a, dtype=float)
    b = np.asarray(frame_b, dtype=float)
    w = np.asarray(weights, dtype=float)
    if a.shape != b.shape or a.shape[0] != w.shape[0]:
        raise ValidationError(f"joint count mismatch: {a.shape}, {b.shape}, {w.shape}")
    rel = quat_mul(a, quat_conj(b))
    return float(np.sum(w * quat_angle(rel)) / a.shape[0])


def frame_distances(seq: RotationSequence, weights=None) -> np.ndarray:
    """``d[f]`` between frames ``f`` and ``f - 1``; ``d[0] = 0``."""
    q = seq.quaternions
    w = np.ones(q.shape[0]) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (q.shape[0],):
        raise ValidationError(f"expected {q.shape[0]} weights, got {w.shape}")
    d = np.zeros(q.shape[1])
    if q.shape[1] > 1:
        rel = quat_mul(q[:, 1:], quat_conj(q[:, :-1]))
        d[1:] = (w[:, None] * quat_angle(rel)).sum(axis=0) / q.shape[0]
    return d


def segment(seq: RotationSequence, params: DsiParams, weights=None) -> Segmentation:
    """Split frames into normal and edge intervals at over-threshold jumps.

    Each jump between frames ``f - 1`` and ``f`` closes the normal interval
    running up to ``f - 1`` and adds the edge ``[f - 1, f]``; the next normal
    interval starts at ``f``. Whatever follows the last jump is closed as a
    trailing normal interval.
    """
    F = seq.num_frames
    d = frame_distances(seq, weights)
    out = []
    i = 0
    for f in range(1, F):
        if d[f] > params.threshold:
            if f - 1 > i:
                out.append(Interval(i, f - 1))
            out.append(Interval(f - 1, f, True, float(d[f])))
            i = f
    if i < F - 1:
        out.append(Interval(i, F - 1))
    return Segmentation(tuple(out), F, d)


def linespace(a: float, b: float, n: int) -> np.ndarray:
    """``n`` evenly spaced values over ``[a, b]``, endpoints included."""
    if n < 1:
        raise ValidationError("linespace needs at least one point")
    if a > b:
        raise ValidationError("linespace needs a <= b")
    if n == 1:
        return np.array([float(a)])
    return np.linspace(float(a), float(b), int(n))


def normal_sample_count(params: DsiParams) -> int:
    return max(2, math.ceil(1.0 / params.delta - _COUNT_EPS))


def edge_sample_count(distance: float, params: DsiParams) -> int:
    n = int(math.floor(params.eta * distance / params.delta + _COUNT_EPS))
    if n < 2:
        warnings.warn(f"edge interval with d={distance:.4g} gives {n} samples; clamped to 2")
        n = 2
    return n


def _split(iv: Interval, max_gap: int) -> list[Interval]:
    gaps = iv.end - iv.start
    if iv.edge or gaps <= max_gap:
        return [iv]
    pieces = math.ceil(gaps / max_gap)
    cuts = np.rint(np.linspace(iv.start, iv.end, pieces + 1)).astype(int)
    return [Interval(int(a), int(b)) for a, b in zip(cuts[:-1], cuts[1:])]


def sample_grid(seg: Segmentation, params: DsiParams) -> list[tuple[Interval, np.ndarray]]:
    """Per-piece sample times in source-frame units, endpoints included.

    Normal intervals longer than ``max_degree`` frame gaps are split into
    pieces that share endpoints, so no polynomial exceeds that degree.
    Shared endpoints between neighbouring pieces appear in both grids; see
    :func:`concat_grid`.
    """
    pieces = []
    for iv in seg.intervals:
        for piece in _split(iv, params.max_degree):
            n = edge_sample_count(piece.distance, params) if piece.edge else normal_sample_count(params)
            pieces.append((piece, linespace(piece.start, piece.end, n)))
    return pieces


def _keep_masks(pieces) -> list[np.ndarray]:
    masks = []
    last = None
    for _, times in pieces:
        keep = np.ones(len(times), dtype=bool)
        if last is not None and times[0] == last:
            keep[0] = False
        masks.append(keep)
        last = times[-1]
    return masks


def concat_grid(pieces) -> np.ndarray:
    """Concatenated sample times with duplicated shared endpoints removed."""
    return np.concatenate([t[m] for (_, t), m in zip(pieces, _keep_masks(pieces))])


def lagrange_basis(control_times, sample_times) -> np.ndarray:
    """Matrix ``L[s, t]`` of Lagrange cardinal polynomials at the samples."""
    x = np.asarray(control_times, dtype=float)
    s = np.asarray(sample_times, dtype=float)
    if len(np.unique(x)) != len(x):
        raise ValidationError("control times must be distinct")
    lo, hi = x.min(), x.max()
    if np.any(s < lo) or np.any(s > hi):
        raise ExtrapolationError(f"sample times must lie within [{lo}, {hi}]")
    L = np.ones((len(s), len(x)))
    for t in range(len(x)):
        for m in range(len(x)):
            if m != t:
                L[:, t] *= (s - x[m]) / (x[t] - x[m])
    return L


def lagrange_interpolate(control_times, control_values, sample_times, normalize: bool = True) -> np.ndarray:
    """Evaluate the componentwise Lagrange polynomial through the controls.

    ``control_values`` has shape ``(..., K, C)`` with the control axis second
    to last; the result has shape ``(..., S, C)``. With ``normalize`` the
    samples are treated as quaternions and rescaled to unit length.
    """
    L = lagrange_basis(control_times, sample_times)
    vals = np.asarray(control_values, dtype=float)
    out = np.einsum("sk,...kc->...sc", L, vals)
    if normalize:
        norms = np.linalg.norm(out, axis=-1, keepdims=True)
        if np.any(norms < MIN_PRENORM):
            raise ValidationError(
                "interpolated quaternion norm fell below 0.5; control hemispheres are misaligned"
            )
        out = out / norms
    return out


def _interpolate_pieces(seq: RotationSequence, pieces) -> tuple[np.ndarray, np.ndarray]:
    q = align_hemispheres(seq.quaternions, axis=1)
    quats, roots = [], []
    for (piece, times), keep in zip(pieces, _keep_masks(pieces)):
        ctrl = np.arange(piece.start, piece.end + 1)
        quats.append(lagrange_interpolate(ctrl, q[:, ctrl], times[keep]))
        roots.append(lagrange_interpolate(ctrl, seq.root_positions[ctrl], times[keep], normalize=False))
    return np.concatenate(quats, axis=1), np.concatenate(roots, axis=0)


def dsi_interpolate(seq: RotationSequence, params: DsiParams, weights=None) -> RotationSequence:
    """Resample ``seq`` on the dynamic grid; duration is preserved by rescaling fps."""
    if seq.num_frames < 2:
        raise ValidationError("interpolation needs at least two frames")
    pieces = sample_grid(segment(seq, params, weights), params)
    quats, roots = _interpolate_pieces(seq, pieces)
    quats = align_hemispheres(quats, axis=1)
    n_out = quats.shape[1]
    fps = seq.fps * (n_out - 1) / (seq.num_frames - 1)
    return RotationSequence(fps, roots, quats, seq.joint_names)


def grid_times(seq: RotationSequence, params: DsiParams, weights=None) -> np.ndarray:
    """Source-frame time of every frame :func:`dsi_interpolate` produces."""
    return concat_grid(sample_grid(segment(seq, params, weights), params))


def variant_seed(params: DsiParams, v: int) -> int:
    return derive_seed(params.seed, "variant", v)


def variant_noise(shape, params: DsiParams, v: int, attempt: int = 0) -> np.ndarray:
    """The additive quaternion noise of variant ``v`` (first draw by default)."""
    rng = make_rng(variant_seed(params, v))
    for _ in range(attempt):
        rng.uniform(params.noise_low, params.noise_high, size=shape)
    return rng.uniform(params.noise_low, params.noise_high, size=shape)


def random_variants(seq: RotationSequence, params: DsiParams) -> AnimationSet:
    """Add independent uniform noise to every quaternion component, per variant."""
    q = seq.quaternions
    out = []
    seeds = []
    for v in range(params.variants):
        rng = make_rng(variant_seed(params, v))
        for _ in range(MAX_RESAMPLES):
            noisy = q + rng.uniform(params.noise_low, params.noise_high, size=q.shape)
            norms = np.linalg.norm(noisy, axis=-1, keepdims=True)
            if np.all(norms >= MIN_PRENORM):
                break
        else:
            raise ValidationError(
                f"variant {v}: noise bounds keep collapsing quaternions; narrow them"
            )
        out.append(align_hemispheres(noisy / norms, axis=1))
        seeds.append(variant_seed(params, v))
    roots = np.broadcast_to(seq.root_positions, (params.variants,) + seq.root_positions.shape)
    return AnimationSet(seq.fps, roots.copy(), np.stack(out), tuple(seeds), seq.joint_names)


def smooth_set(anim: AnimationSet, spans) -> AnimationSet:
    """Supersmooth every quaternion component and root coordinate track."""
    q = anim.quaternions.copy()
    roots = anim.root_positions.copy()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        for idx in np.ndindex(q.shape[0], q.shape[1]):
            for c in range(4):
                q[idx + (slice(None), c)] = supersmooth(q[idx + (slice(None), c)], spans)
        for v in range(roots.shape[0]):
            for c in range(3):
                roots[v, :, c] = supersmooth(roots[v, :, c], spans)
    if caught:
        warnings.warn(str(caught[0].message))
    q /= np.linalg.norm(q, axis=-1, keepdims=True)
    q = align_hemispheres(q, axis=2)
    return AnimationSet(anim.fps, roots, q, anim.seeds, anim.joint_names)


def dsi_pipeline(seq: RotationSequence, params: DsiParams, weights=None) -> AnimationSet:
    """Interpolate, draw variants, and smooth each variant."""
    stages = (
        ("interpolate", lambda x: dsi_interpolate(x, params, weights)),
        ("variants", lambda x: random_variants(x, params)),
        ("smooth", lambda x: smooth_set(x, params.spans)),
    )
    x = seq
    for name, stage in stages:
        try:
            x = stage(x)
        except StageError:
            raise
        except Exception as exc:
            raise StageError(name, exc) from exc
    return x
