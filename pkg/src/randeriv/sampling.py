"""Point-measure samplers, Gamma(beta/2) weights, and splittable seed streams."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import BadSpec

MASK64 = (1 << 64) - 1


def derive_stream_id(*keys) -> int:
    """Stable 64-bit id from a tuple of ints/strings (independent of PYTHONHASHSEED)."""
    h = hashlib.blake2b(repr(tuple(keys)).encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little")


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream keyed by (master_seed, stream_id).

    ``generator()`` always restarts the stream from the beginning, so a stream
    can be handed to a pure function and replayed.
    """

    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not (0 <= self.master_seed <= MASK64 and 0 <= self.stream_id <= MASK64):
            raise BadSpec("seed and stream id must be unsigned 64-bit integers")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, *keys) -> "RngStream":
        return RngStream(self.master_seed, derive_stream_id(self.stream_id, *keys))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


# ------------------------------------------------------------------ measures

KINDS = (
    "uniform_circle",
    "uniform_disk",
    "gaussian_plane",
    "uniform_annulus",
    "atom_mixture",
    "heavy_tail_radial",
)


@dataclass(frozen=True)
class MeasureSpec:
    """Initial point law. ``radius`` scales circle/disk/gaussian kinds."""

    kind: str
    radius: float = 1.0
    r_in: float = 0.5
    r_out: float = 1.0
    atoms: tuple = ()
    probs: tuple = ()
    c_exponent: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise BadSpec(f"unknown measure kind {self.kind!r}")
        if self.radius <= 0:
            raise BadSpec("radius must be positive")
        if self.kind == "uniform_annulus" and not (0 <= self.r_in < self.r_out):
            raise BadSpec("annulus needs 0 <= r_in < r_out")
        if self.kind == "atom_mixture":
            if len(self.atoms) == 0 or len(self.atoms) != len(self.probs):
                raise BadSpec("atom_mixture needs matching atoms and probs")
            p = np.asarray(self.probs, dtype=float)
            if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
                raise BadSpec("atom probabilities must be nonnegative and sum to 1")
        if self.kind == "heavy_tail_radial" and self.c_exponent <= 0:
            raise BadSpec("c_exponent must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "MeasureSpec":
        d = dict(d)
        if "atoms" in d:
            d["atoms"] = tuple(_parse_complex(a) for a in d["atoms"])
        if "probs" in d:
            d["probs"] = tuple(float(p) for p in d["probs"])
        try:
            return cls(**d)
        except TypeError as e:
            raise BadSpec(str(e)) from e

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.kind in ("uniform_circle", "uniform_disk", "gaussian_plane"):
            out["radius"] = self.radius
        elif self.kind == "uniform_annulus":
            out.update(r_in=self.r_in, r_out=self.r_out)
        elif self.kind == "atom_mixture":
            out["atoms"] = [[a.real, a.imag] for a in self.atoms]
            out["probs"] = list(self.probs)
        else:
            out["c_exponent"] = self.c_exponent
        return out


def _parse_complex(a) -> complex:
    if isinstance(a, (list, tuple)):
        return complex(float(a[0]), float(a[1]))
    if isinstance(a, str):
        return complex(a.replace(" ", ""))
    return complex(a)


def sample_points(spec: MeasureSpec, n: int, rng) -> np.ndarray:
    """n i.i.d. draws from ``spec`` as a complex array."""
    if n < 1:
        raise BadSpec("n must be >= 1")
    g = as_generator(rng)
    kind = spec.kind
    if kind == "uniform_circle":
        return spec.radius * np.exp(2j * np.pi * g.random(n))
    if kind == "uniform_disk":
        r = spec.radius * np.sqrt(g.random(n))
        return r * np.exp(2j * np.pi * g.random(n))
    if kind == "gaussian_plane":
        # standard complex normal: E|Z|^2 = radius^2
        return spec.radius * (g.standard_normal(n) + 1j * g.standard_normal(n)) / np.sqrt(2)
    if kind == "uniform_annulus":
        r2 = g.uniform(spec.r_in ** 2, spec.r_out ** 2, n)
        return np.sqrt(r2) * np.exp(2j * np.pi * g.random(n))
    if kind == "atom_mixture":
        idx = g.choice(len(spec.atoms), size=n, p=np.asarray(spec.probs))
        return np.asarray(spec.atoms, dtype=complex)[idx]
    # heavy_tail_radial: P(|Z| > R) = R^-c for R >= 1
    u = 1.0 - g.random(n)
    r = u ** (-1.0 / spec.c_exponent)
    return r * np.exp(2j * np.pi * g.random(n))


# ------------------------------------------------------------------ weights

@dataclass(frozen=True)
class WeightVector:
    values: np.ndarray = field(repr=False)
    beta: float = float("inf")

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or len(v) == 0:
            raise ValueError("weights must be a nonempty vector")
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise ValueError("weights must be finite and strictly positive")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


def standard_gamma(shape: float, size, g: np.random.Generator) -> np.ndarray:
    """Gamma(shape, 1) draws by Marsaglia-Tsang squeeze/rejection.

    For shape < 1 draws at shape + 1 and multiplies by U^(1/shape).
    """
    if shape <= 0:
        raise BadSpec("gamma shape must be positive")
    boost = shape < 1
    a = shape + 1.0 if boost else shape
    d = a - 1.0 / 3.0
    c = 1.0 / np.sqrt(9.0 * d)
    total = int(np.prod(size))
    out = np.empty(total)
    filled = 0
    while filled < total:
        m = max(16, int(1.1 * (total - filled)) + 8)
        x = g.standard_normal(m)
        u = g.random(m)
        v = (1.0 + c * x) ** 3
        pos = v > 0
        x2 = x * x
        with np.errstate(invalid="ignore", divide="ignore"):
            accept = pos & (
                (u < 1.0 - 0.0331 * x2 * x2)
                | (np.log(u) < 0.5 * x2 + d * (1.0 - v + np.log(v)))
            )
        got = (d * v)[accept][: total - filled]
        out[filled:filled + len(got)] = got
        filled += len(got)
    if boost:
        # 1 - U lies in (0, 1]; log-space keeps tiny shapes from underflowing early
        u = 1.0 - g.random(total)
        out = np.exp(np.log(out) + np.log(u) / shape)
        out = np.maximum(out, np.finfo(float).tiny)
    return out.reshape(size)


def sample_gamma_weights(beta: float, n: int, rng) -> WeightVector:
    """n i.i.d. Gamma(beta/2) weights (unit scale)."""
    if not beta > 0:
        raise BadSpec("beta must be positive")
    if n < 1:
        raise BadSpec("n must be >= 1")
    vals = standard_gamma(beta / 2.0, n, as_generator(rng))
    return WeightVector(vals, beta)


def dirichlet_normalize(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if len(w) == 0:
        raise ValueError("empty weight vector")
    return w / w.sum()
