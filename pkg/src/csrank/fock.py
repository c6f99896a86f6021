"""Single-mode bosonic states in the truncated Fock basis.

States are stored as finite complex amplitude vectors (index n = Fock
number).  Coherent states follow a_n = e^{-|alpha|^2/2} alpha^n / sqrt(n!),
squeezed states a_{2n} = (1/cosh r) lambda^n sqrt((2n)!) / (2^n n!) with
lambda = -e^{i phi} tanh(r).  All factorial-bearing amplitudes are assembled
in the log domain so large Fock numbers stay inside double range.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc, gammaln

NORM_TOL = 1e-12

# Displacements closer than this are treated as the same coherent state.
ALPHA_MERGE_TOL = 1e-12

# Default cap on the truncation weight of infinite-support states.
DEFAULT_MAX_TAIL = 1e-12


@dataclass(frozen=True)
class FockVector:
    """A single-mode pure state truncated at ``cutoff``.

    ``normalized`` marks vectors whose stored norm is 1 to within 1e-12;
    truncated infinite-support states keep the flag off and carry the
    truncation weight in ``tail_weight`` instead of being silently
    renormalized.
    """

    amplitudes: np.ndarray
    cutoff: int
    normalized: bool = False
    tail_weight: float | None = None

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amps)
        if amps.ndim != 1:
            raise ValueError("amplitudes must be a 1-d sequence")
        if len(amps) != self.cutoff + 1:
            raise ValueError(
                f"length {len(amps)} does not match cutoff {self.cutoff}"
            )
        if not np.all(np.isfinite(amps.real)) or not np.all(np.isfinite(amps.imag)):
            raise ValueError("amplitudes must be finite")
        if self.normalized:
            norm_sq = float(np.vdot(amps, amps).real)
            if abs(norm_sq - 1.0) > NORM_TOL:
                raise ValueError(f"normalized flag set but |norm^2 - 1| = {abs(norm_sq - 1.0):.3e}")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def highest_occupied(self) -> int:
        """Largest Fock index with a nonzero amplitude (-1 for the zero vector)."""
        nz = np.nonzero(self.amplitudes)[0]
        return int(nz[-1]) if len(nz) else -1

    def mean_fock_number(self) -> float:
        w = np.abs(self.amplitudes) ** 2
        total = w.sum()
        if total == 0:
            return 0.0
        return float(np.arange(self.cutoff + 1) @ w / total)

    def padded(self, cutoff: int) -> "FockVector":
        """Zero-pad up to a larger cutoff (no-op when already long enough)."""
        if cutoff <= self.cutoff:
            return self
        amps = np.zeros(cutoff + 1, dtype=complex)
        amps[: self.cutoff + 1] = self.amplitudes
        return FockVector(amps, cutoff, self.normalized, self.tail_weight)


@dataclass(frozen=True)
class CoherentTerm:
    """One branch c |alpha> of a coherent superposition."""

    c: complex
    alpha: complex

    def __post_init__(self):
        for name in ("c", "alpha"):
            z = complex(getattr(self, name))
            object.__setattr__(self, name, z)
            if not (math.isfinite(z.real) and math.isfinite(z.imag)):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class CoherentSuperposition:
    """Finite superposition sum_k c_k |alpha_k> with pairwise distinct alpha.

    Terms whose displacements coincide within ALPHA_MERGE_TOL are merged at
    construction by summing their coefficients.
    """

    terms: tuple

    def __init__(self, terms):
        merged: list[CoherentTerm] = []
        for t in terms:
            t = t if isinstance(t, CoherentTerm) else CoherentTerm(*t)
            for i, m in enumerate(merged):
                if abs(m.alpha - t.alpha) <= ALPHA_MERGE_TOL:
                    merged[i] = CoherentTerm(m.c + t.c, m.alpha)
                    break
            else:
                merged.append(t)
        object.__setattr__(self, "terms", tuple(merged))

    def __len__(self) -> int:
        return len(self.terms)

    def coefficients(self) -> np.ndarray:
        return np.array([t.c for t in self.terms], dtype=complex)

    def displacements(self) -> np.ndarray:
        return np.array([t.alpha for t in self.terms], dtype=complex)


@dataclass(frozen=True)
class SqueezedParams:
    """Squeezing magnitude r >= 0 and phase phi, reduced to [0, 2 pi)."""

    r: float
    phi: float = 0.0

    def __post_init__(self):
        if not (self.r >= 0 and math.isfinite(self.r)):
            raise ValueError("squeezing magnitude r must be finite and >= 0")
        object.__setattr__(self, "phi", float(self.phi) % (2 * math.pi))

    @property
    def lam(self) -> complex:
        """lambda = -e^{i phi} tanh(r); |lambda| < 1 for finite r."""
        return -np.exp(1j * self.phi) * math.tanh(self.r)


def fock_state(n: int, cutoff: int | None = None) -> FockVector:
    """The Fock basis state |n>."""
    if n < 0:
        raise ValueError("Fock number must be non-negative")
    if cutoff is None:
        cutoff = n
    if n > cutoff:
        raise ValueError(f"n={n} exceeds cutoff={cutoff}")
    amps = np.zeros(cutoff + 1, dtype=complex)
    amps[n] = 1.0
    return FockVector(amps, cutoff, normalized=True, tail_weight=0.0)


def core_state(amplitudes, cutoff: int | None = None) -> FockVector:
    """A normalized finite superposition of Fock states."""
    amps = np.asarray(amplitudes, dtype=complex)
    norm = np.linalg.norm(amps)
    if norm == 0:
        raise ValueError("core state must have a nonzero amplitude")
    amps = amps / norm
    if cutoff is not None and cutoff + 1 > len(amps):
        amps = np.concatenate([amps, np.zeros(cutoff + 1 - len(amps), dtype=complex)])
    return FockVector(amps, len(amps) - 1, normalized=True, tail_weight=0.0)


def coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    """Fock amplitudes e^{-|alpha|^2/2} alpha^n / sqrt(n!) for n <= cutoff."""
    alpha = complex(alpha)
    out = np.zeros(cutoff + 1, dtype=complex)
    if alpha == 0:
        out[0] = 1.0
        return out
    n = np.arange(cutoff + 1)
    log_mag = -0.5 * abs(alpha) ** 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    phase = np.exp(1j * n * np.angle(alpha))
    return np.exp(log_mag) * phase


def coherent_tail_weight(alpha: complex, cutoff: int) -> float:
    """Probability weight of the truncated Poisson tail beyond ``cutoff``."""
    lam = abs(complex(alpha)) ** 2
    if lam == 0:
        return 0.0
    # P(N > cutoff) for N ~ Poisson(lam), via the regularized incomplete gamma.
    return float(gammainc(cutoff + 1, lam))


def _auto_coherent_cutoff(alpha: complex, max_tail: float) -> int:
    lam = abs(complex(alpha)) ** 2
    c = max(8, int(lam + 10 * math.sqrt(lam + 1)))
    while coherent_tail_weight(alpha, c) > max_tail:
        c = int(1.5 * c) + 8
        if c > 100_000:
            raise ValueError("cannot reach requested truncation weight")
    while c > 0 and coherent_tail_weight(alpha, c - 1) <= max_tail:
        c -= 1
    return c


def coherent_state(
    alpha: complex,
    cutoff: int | None = None,
    max_tail: float = DEFAULT_MAX_TAIL,
) -> FockVector:
    """Truncated coherent state |alpha>.

    With ``cutoff=None`` the smallest cutoff whose truncation weight does not
    exceed ``max_tail`` is chosen.  The attained tail weight is stored on the
    returned vector as a diagnostic; the vector is not renormalized.
    """
    if cutoff is None:
        cutoff = _auto_coherent_cutoff(alpha, max_tail)
    tail = coherent_tail_weight(alpha, cutoff)
    return FockVector(
        coherent_amplitudes(alpha, cutoff), cutoff, normalized=False, tail_weight=tail
    )


def _squeezed_even_log_mags(params: SqueezedParams, n_pairs: int) -> np.ndarray:
    """log |a_{2n}| for n = 0..n_pairs, -inf entries for lambda = 0.

    The prefactor is 1/sqrt(cosh r), which makes sum_n |a_{2n}|^2 -> 1
    (sum_n |lam|^{2n} binom(2n, n) / 4^n equals cosh r for |lam| = tanh r).
    """
    lam = params.lam
    n = np.arange(n_pairs + 1)
    if lam == 0:
        out = np.full(n_pairs + 1, -np.inf)
        out[0] = 0.0
        return out
    return (
        -0.5 * math.log(math.cosh(params.r))
        + n * math.log(abs(lam))
        + 0.5 * gammaln(2 * n + 1)
        - n * math.log(2.0)
        - gammaln(n + 1)
    )


def squeezed_state(
    params: SqueezedParams,
    cutoff: int | None = None,
    max_tail: float = DEFAULT_MAX_TAIL,
) -> FockVector:
    """Truncated squeezed vacuum a_{2n} = lam^n sqrt((2n)!) / (2^n n! sqrt(cosh r)).

    Odd amplitudes are exactly zero; with ``cutoff=None`` the smallest cutoff
    whose truncation weight does not exceed ``max_tail`` is chosen.
    """
    if cutoff is None:
        n_pairs = 4
        while True:
            weights = np.exp(2 * _squeezed_even_log_mags(params, n_pairs))
            if 1.0 - weights.sum() <= max_tail:
                break
            n_pairs *= 2
            if n_pairs > 100_000:
                raise ValueError("cannot reach requested truncation weight")
        while n_pairs > 0 and 1.0 - weights[:n_pairs].sum() <= max_tail:
            n_pairs -= 1
        cutoff = 2 * n_pairs
    n_pairs = cutoff // 2
    log_mags = _squeezed_even_log_mags(params, n_pairs)
    lam = params.lam
    phases = np.exp(1j * np.arange(n_pairs + 1) * np.angle(lam)) if lam != 0 else 1.0
    amps = np.zeros(cutoff + 1, dtype=complex)
    with np.errstate(over="ignore"):
        amps[0 : 2 * n_pairs + 1 : 2] = np.exp(log_mags) * phases
    tail = max(0.0, 1.0 - float(np.vdot(amps, amps).real))
    return FockVector(amps, cutoff, normalized=False, tail_weight=tail)


def coherent_overlap(alpha: complex, beta: complex) -> complex:
    """Exact <alpha|beta> = exp(-|alpha|^2/2 - |beta|^2/2 + conj(alpha) beta)."""
    alpha, beta = complex(alpha), complex(beta)
    return np.exp(-0.5 * abs(alpha) ** 2 - 0.5 * abs(beta) ** 2 + np.conj(alpha) * beta)


def superposition_norm_sq(sup: CoherentSuperposition) -> float:
    """Exact squared norm of sum_k c_k |alpha_k> via the coherent Gram matrix."""
    c = sup.coefficients()
    a = sup.displacements()
    gram = np.exp(
        -0.5 * np.abs(a)[:, None] ** 2
        - 0.5 * np.abs(a)[None, :] ** 2
        + np.conj(a)[:, None] * a[None, :]
    )
    return float(np.real(np.conj(c) @ gram @ c))


def superposition_to_fock(
    sup: CoherentSuperposition,
    cutoff: int | None = None,
    max_tail: float = DEFAULT_MAX_TAIL,
) -> FockVector:
    """Fock expansion a_n = sum_k c_k e^{-|alpha_k|^2/2} alpha_k^n / sqrt(n!)."""
    if len(sup) == 0:
        raise ValueError("empty superposition")
    if cutoff is None:
        cutoff = max(_auto_coherent_cutoff(t.alpha, max_tail) for t in sup.terms)
    amps = np.zeros(cutoff + 1, dtype=complex)
    for t in sup.terms:
        amps += t.c * coherent_amplitudes(t.alpha, cutoff)
    tail = max(0.0, superposition_norm_sq(sup) - float(np.vdot(amps, amps).real))
    return FockVector(amps, cutoff, normalized=False, tail_weight=tail)


def _pad_pair(a: FockVector, b: FockVector):
    cutoff = max(a.cutoff, b.cutoff)
    return a.padded(cutoff).amplitudes, b.padded(cutoff).amplitudes


def fidelity(a: FockVector, b: FockVector) -> float:
    """|<a|b>|^2 of the two truncations, renormalized before the overlap."""
    x, y = _pad_pair(a, b)
    nx = np.linalg.norm(x)
    ny = np.linalg.norm(y)
    if nx == 0 or ny == 0:
        raise ValueError("fidelity of a zero-norm vector is undefined")
    return min(1.0, float(abs(np.vdot(x, y)) ** 2 / (nx * ny) ** 2))


def two_norm_distance(a: FockVector, b: FockVector) -> float:
    """||a - b||_2 of the raw (not renormalized) amplitude vectors."""
    x, y = _pad_pair(a, b)
    return float(np.linalg.norm(x - y))


def state_from_descriptor(descriptor: dict) -> FockVector:
    """Build a single-mode state from a JSON descriptor.

    Supported forms (all with optional "cutoff"):
      {"type": "fock", "n": N}
      {"type": "core", "amps": [[re, im], ...]}
      {"type": "squeezed", "r": R, "phi": PHI}
      {"type": "superposition", "terms": [{"c": [re, im], "alpha": [re, im]}, ...]}
    """
    if not isinstance(descriptor, dict) or "type" not in descriptor:
        raise ValueError("state descriptor must be an object with a 'type' field")
    kind = descriptor["type"]
    cutoff = descriptor.get("cutoff")
    if kind == "fock":
        return fock_state(int(descriptor["n"]), cutoff)
    if kind == "core":
        amps = [complex(re, im) for re, im in descriptor["amps"]]
        return core_state(amps, cutoff)
    if kind == "squeezed":
        params = SqueezedParams(float(descriptor["r"]), float(descriptor.get("phi", 0.0)))
        return squeezed_state(params, cutoff)
    if kind == "superposition":
        terms = [
            CoherentTerm(complex(*t["c"]), complex(*t["alpha"]))
            for t in descriptor["terms"]
        ]
        return superposition_to_fock(CoherentSuperposition(terms), cutoff)
    raise ValueError(f"unknown state type {kind!r}")
