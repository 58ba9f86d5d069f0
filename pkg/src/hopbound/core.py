"""Problem instances, energy conventions and matrix file I/O.

Spins are stored as +/-1 integers; the scaled vector is ``x = sigma / sqrt(n)``.
Every energy is reported through the convention-free ratios

    normalized_xi        = sqrt(r) / n     (= ||H x||_2 / sqrt(n))
    normalized_quadratic = r / n**2        (= ||H x||_2**2 / n)

where ``r = ||H sigma||_2**2``.  The objective is the full quadratic form, i.e. the
diagonal of ``H^T H`` is kept; it only adds the sigma-independent constant
``sum_i ||H[:, i]||**2`` to ``r``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Union

import numpy as np

__all__ = [
    "Ensemble",
    "Form",
    "Algorithm",
    "ProblemInstance",
    "EnergyReport",
    "MatrixFormatError",
    "GENERATOR_VERSION",
    "sample_instance",
    "make_instance",
    "as_spins",
    "energy",
    "spin_sign",
    "load_matrix",
    "save_matrix",
    "sample_matrix_path",
    "mix_seed",
]

#: Identifies the instance-generation procedure; bump whenever the draw changes.
#: v1: numpy ``Generator(PCG64(SeedSequence(seed)))``; Gaussian entries from
#: ``standard_normal((m, n))`` (ziggurat), Bernoulli entries ``2 * integers(0, 2, (m, n)) - 1``,
#: both filled in row-major order.
GENERATOR_VERSION = "pcg64-ziggurat-v1"

_UINT64_MAX = 2**64 - 1


class Ensemble(str, Enum):
    GAUSSIAN = "gaussian"
    BERNOULLI = "bernoulli"
    LOADED = "loaded"

    @classmethod
    def parse(cls, value: Union[str, "Ensemble"]) -> "Ensemble":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown ensemble {value!r}") from None


class Form(str, Enum):
    """Which Hopfield form: maximize (positive) or minimize (negative) ``||H x||``."""

    POSITIVE = "positive"
    NEGATIVE = "negative"

    @classmethod
    def parse(cls, value: Union[str, "Form"]) -> "Form":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"pos": cls.POSITIVE, "positive": cls.POSITIVE, "+": cls.POSITIVE,
                   "neg": cls.NEGATIVE, "negative": cls.NEGATIVE, "-": cls.NEGATIVE}
        if key not in aliases:
            raise ValueError(f"unknown form {value!r} (expected pos or neg)")
        return aliases[key]

    @property
    def short(self) -> str:
        return "pos" if self is Form.POSITIVE else "neg"


class Algorithm(str, Enum):
    EXACT = "exact"
    GREEDY = "greedy"
    GREEDY_SORTED = "greedy_sorted"
    EIGEN = "eigen"

    @classmethod
    def parse(cls, value: Union[str, "Algorithm"]) -> "Algorithm":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower().replace("-", "_"))
        except ValueError:
            raise ValueError(f"unknown algorithm {value!r}") from None


@dataclass(frozen=True)
class ProblemInstance:
    """An ``m x n`` pattern matrix together with how it was obtained.

    The matrix is stored read-only so instances can be shared freely between workers.
    """

    H: np.ndarray
    ensemble: Ensemble = Ensemble.LOADED
    seed: Optional[int] = None
    m: int = field(init=False)
    n: int = field(init=False)

    def __post_init__(self):
        H = np.array(self.H, dtype=np.float64, order="C", copy=True)
        if H.ndim != 2:
            raise ValueError(f"pattern matrix must be 2-D, got shape {H.shape}")
        m, n = H.shape
        if m < 1 or n < 1:
            raise ValueError(f"pattern matrix must have m >= 1 and n >= 1, got {m}x{n}")
        if not np.all(np.isfinite(H)):
            raise ValueError("pattern matrix contains non-finite entries")
        H.setflags(write=False)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "m", int(m))
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "ensemble", Ensemble.parse(self.ensemble))

    @property
    def alpha(self) -> float:
        return self.m / self.n

    def column_norms_sq(self) -> np.ndarray:
        return np.einsum("ij,ij->j", self.H, self.H)


@dataclass(frozen=True)
class EnergyReport:
    raw_quadratic: float
    normalized_xi: float
    normalized_quadratic: float
    form: Form
    algorithm: Optional[Algorithm] = None

    @classmethod
    def from_raw(cls, r: float, n: int, form, algorithm=None) -> "EnergyReport":
        r = float(r)
        if r < 0:
            raise ValueError(f"raw quadratic value must be non-negative, got {r}")
        return cls(
            raw_quadratic=r,
            normalized_xi=math.sqrt(r) / n,
            normalized_quadratic=r / (n * n),
            form=Form.parse(form),
            algorithm=None if algorithm is None else Algorithm.parse(algorithm),
        )

    def to_dict(self) -> dict:
        return {
            "raw_quadratic": self.raw_quadratic,
            "normalized_xi": self.normalized_xi,
            "normalized_quadratic": self.normalized_quadratic,
            "form": self.form.value,
            "algorithm": None if self.algorithm is None else self.algorithm.value,
        }


def _check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed <= _UINT64_MAX:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def mix_seed(base_seed: int, index: int) -> int:
    """Derive the seed of trial ``index`` from ``base_seed``.

    This is the ``index``-th output of a SplitMix64 stream started at ``base_seed``:
    ``z = base_seed + (index + 1) * 0x9E3779B97F4A7C15 (mod 2**64)`` followed by the
    SplitMix64 finalizer.  Pure integer arithmetic, so any implementation reproduces it.
    """
    z = (_check_seed(base_seed) + (int(index) + 1) * 0x9E3779B97F4A7C15) & _UINT64_MAX
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _UINT64_MAX
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _UINT64_MAX
    return z ^ (z >> 31)


def sample_instance(m: int, n: int, ensemble="gaussian", seed: int = 0) -> ProblemInstance:
    """Draw an ``m x n`` pattern matrix, deterministically in ``(m, n, ensemble, seed)``."""
    m, n = int(m), int(n)
    if m < 1 or n < 1:
        raise ValueError(f"m and n must be positive, got m={m}, n={n}")
    ensemble = Ensemble.parse(ensemble)
    seed = _check_seed(seed)
    rng = np.random.Generator(np.random.PCG64(seed))
    if ensemble is Ensemble.GAUSSIAN:
        H = rng.standard_normal((m, n))
    elif ensemble is Ensemble.BERNOULLI:
        H = 2.0 * rng.integers(0, 2, size=(m, n)).astype(np.float64) - 1.0
    else:
        raise ValueError("cannot sample from the 'loaded' ensemble; use load_matrix")
    return ProblemInstance(H, ensemble=ensemble, seed=seed)


def make_instance(H) -> ProblemInstance:
    """Wrap an explicit matrix (lists are fine) as a Loaded instance."""
    return ProblemInstance(np.atleast_2d(np.asarray(H, dtype=np.float64)))


def spin_sign(values: np.ndarray) -> np.ndarray:
    """Componentwise sign with ``sign(0) = +1``, as int8 spins."""
    return np.where(np.asarray(values) >= 0, 1, -1).astype(np.int8)


def as_spins(sigma, n: Optional[int] = None) -> np.ndarray:
    s = np.asarray(sigma)
    if s.ndim != 1:
        raise ValueError("spin assignment must be one-dimensional")
    if n is not None and s.shape[0] != n:
        raise ValueError(f"spin assignment has length {s.shape[0]}, instance has n={n}")
    if not np.all((s == 1) | (s == -1)):
        raise ValueError("spin assignment entries must be exactly -1 or +1")
    return s.astype(np.int8)


def energy(instance: ProblemInstance, sigma, form="positive", algorithm=None) -> EnergyReport:
    """Evaluate ``r = ||H sigma||^2`` for a +/-1 assignment.

    ``form`` and ``algorithm`` are copied into the report; the value itself does not
    depend on them.
    """
    s = as_spins(sigma, instance.n).astype(np.float64)
    v = instance.H @ s
    return EnergyReport.from_raw(float(v @ v), instance.n, form, algorithm)


# --------------------------------------------------------------------------- file I/O


class MatrixFormatError(ValueError):
    """Raised for a malformed matrix file; carries the 1-based line number."""

    def __init__(self, path, lineno: Optional[int], message: str):
        self.path = str(path)
        self.lineno = lineno
        where = f"{self.path}:{lineno}" if lineno is not None else self.path
        super().__init__(f"{where}: {message}")


def load_matrix(path) -> ProblemInstance:
    """Read the plain-text matrix format.

    Layout: optional ``#`` comment lines, a header ``"m n"``, then ``m`` lines of ``n``
    whitespace-separated reals.  Blank lines after the header are ignored.
    """
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()

    idx = 0
    while idx < len(lines) and (lines[idx].lstrip().startswith("#") or not lines[idx].strip()):
        idx += 1
    if idx == len(lines):
        raise MatrixFormatError(path, None, "missing header line 'm n'")
    header = lines[idx].split()
    if len(header) != 2:
        raise MatrixFormatError(path, idx + 1, f"header must be 'm n', got {lines[idx]!r}")
    try:
        m, n = int(header[0]), int(header[1])
    except ValueError:
        raise MatrixFormatError(path, idx + 1, f"header must hold two integers, got {lines[idx]!r}") from None
    if m < 1 or n < 1:
        raise MatrixFormatError(path, idx + 1, f"header dimensions must be positive, got {m} {n}")

    rows = []
    for lineno, line in enumerate(lines[idx + 1:], start=idx + 2):
        tokens = line.split()
        if not tokens:
            continue
        if len(rows) == m:
            raise MatrixFormatError(path, lineno, f"more than the {m} rows declared in the header")
        if len(tokens) != n:
            raise MatrixFormatError(
                path, lineno, f"row {len(rows) + 1} has {len(tokens)} entries, expected {n}")
        try:
            rows.append([float(t) for t in tokens])
        except ValueError:
            bad = next(t for t in tokens if not _is_float(t))
            raise MatrixFormatError(path, lineno, f"non-numeric token {bad!r}") from None
    if len(rows) != m:
        raise MatrixFormatError(path, len(lines), f"expected {m} rows, found {len(rows)}")
    return ProblemInstance(np.array(rows, dtype=np.float64), ensemble=Ensemble.LOADED)


def _is_float(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def save_matrix(instance: ProblemInstance, path) -> None:
    """Write ``instance.H`` with 17 significant digits (exact for float64)."""
    H = instance.H if isinstance(instance, ProblemInstance) else np.atleast_2d(instance)
    m, n = H.shape
    out = [f"{m} {n}"]
    out.extend(" ".join(f"{v:.17g}" for v in row) for row in H)
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")


def sample_matrix_path() -> Path:
    """Location of the 3x4 sample matrix shipped with the package."""
    return Path(__file__).with_name("data") / "sample_3x4.txt"
