"""Projective measurements with intrinsic noise, at desk scale.

The space is ``H_A (x) H_E``: alternatives ``A_n`` (dimension ``d_A``) times
noise modes ``e_mu`` (dimension ``d_E``).  Basis vector ``|A_n e_mu>`` has
index ``n * d_E + mu``, so ``rho[n*d_E + mu, m*d_E + nu] = rho^{mu nu}_{nm}``.
An alternative observed with its noise is the decorated vector
``|A_n z_n> = |A_n> (x) sum_mu a_{n mu} |e_mu>``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.stats import unitary_group

MAX_DIM = 64
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-12
COMPLETENESS_TOL = 1e-9
ZERO_PROBABILITY = 1e-12

Matrix = NDArray[np.complex128]


class StateError(ValueError):
    pass


class ZeroProbabilityError(ValueError):
    pass


class CompletenessWarning(UserWarning):
    pass


class DegenerateRatesWarning(UserWarning):
    pass


# --- validated types ---------------------------------------------------------


def check_state(rho: Matrix) -> Matrix:
    """Raise :class:`StateError` unless ``rho`` is Hermitian, unit-trace and PSD."""
    r = np.asarray(rho, dtype=complex)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise StateError(f"state must be square, got shape {r.shape}")
    if r.shape[0] > MAX_DIM:
        raise StateError(f"dimension {r.shape[0]} exceeds the cap of {MAX_DIM}")
    herm = float(np.max(np.abs(r - r.conj().T)))
    if herm > HERMITIAN_TOL:
        raise StateError(f"not Hermitian: max |rho - rho^dag| = {herm:.3g}")
    tr = complex(np.trace(r))
    if abs(tr - 1.0) > TRACE_TOL:
        raise StateError(f"trace is {tr.real:.15g}, expected 1")
    low = float(np.linalg.eigvalsh(r).min())
    if low < -PSD_TOL:
        raise StateError(f"negative eigenvalue {low:.3g}")
    return r


@dataclass(frozen=True)
class NoiseProfile:
    """Coefficients ``a[n, mu]`` of the noise vector ``z_n``; rows are unit vectors."""

    a: Matrix

    def __post_init__(self) -> None:
        a = np.asarray(self.a, dtype=complex)
        if a.ndim != 2:
            raise StateError("noise profile must be a d_A x d_E matrix")
        norms = np.sum(np.abs(a) ** 2, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-12:
            raise StateError(f"noise rows are not normalized: {norms}")
        object.__setattr__(self, "a", a)

    @property
    def d_A(self) -> int:
        return self.a.shape[0]

    @property
    def d_E(self) -> int:
        return self.a.shape[1]

    @classmethod
    def single_mode(cls, d_A: int, d_E: int = 1, mode: int = 0) -> "NoiseProfile":
        a = np.zeros((d_A, d_E), dtype=complex)
        a[:, mode] = 1.0
        return cls(a)

    def vector(self, n: int) -> Matrix:
        """The decorated basis vector ``|A_n z_n>``."""
        if not 0 <= n < self.d_A:
            raise IndexError(f"alternative {n} out of range for d_A={self.d_A}")
        v = np.zeros(self.d_A * self.d_E, dtype=complex)
        v[n * self.d_E : (n + 1) * self.d_E] = self.a[n]
        return v

    def isometry(self) -> Matrix:
        """Columns are the decorated vectors, mapping ``C^{d_A}`` into ``H_A (x) H_E``."""
        return np.stack([self.vector(n) for n in range(self.d_A)], axis=1)


@dataclass(frozen=True)
class Unitary:
    u: Matrix

    def __post_init__(self) -> None:
        u = np.asarray(self.u, dtype=complex)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise StateError("unitary must be square")
        err = float(np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))))
        if err > 1e-12:
            raise StateError(f"not unitary: max |U U^dag - 1| = {err:.3g}")
        object.__setattr__(self, "u", u)

    @classmethod
    def identity(cls, d: int) -> "Unitary":
        return cls(np.eye(d, dtype=complex))


# --- events and probabilities --------------------------------------------------


def _dims(rho: Matrix, noise: NoiseProfile) -> None:
    if rho.shape[0] != noise.d_A * noise.d_E:
        raise StateError(f"state dimension {rho.shape[0]} does not match d_A*d_E = {noise.d_A * noise.d_E}")


def decorated_projector(n: int, noise: NoiseProfile, d_A: int | None = None, d_E: int | None = None) -> Matrix:
    """``P(A_n z_n) = P(A_n) (x) |z_n><z_n|``, a rank-one projector."""
    if (d_A is not None and d_A != noise.d_A) or (d_E is not None and d_E != noise.d_E):
        raise StateError(f"dimensions ({d_A}, {d_E}) disagree with the noise profile ({noise.d_A}, {noise.d_E})")
    v = noise.vector(n)
    return np.outer(v, v.conj())


def completeness_residual(rho: Matrix, noise: NoiseProfile) -> float:
    """``|sum_n Tr(rho P(A_n z_n)) - 1|``; zero when the state is complete on average."""
    v = noise.isometry()
    return abs(float(np.real(np.trace(v.conj().T @ rho @ v))) - 1.0)


def _warn_completeness(rho: Matrix, noise: NoiseProfile) -> None:
    res = completeness_residual(rho, noise)
    if res > COMPLETENESS_TOL:
        warnings.warn(
            f"state is not complete on average for this noise (residual {res:.3g}); "
            "probabilities over the alternatives will not sum to 1",
            CompletenessWarning,
            stacklevel=3,
        )


def _block(rho: Matrix, m: int, n: int, d_E: int) -> Matrix:
    """``rho^{mu nu}_{mn}`` as a ``d_E x d_E`` matrix."""
    return rho[m * d_E : (m + 1) * d_E, n * d_E : (n + 1) * d_E]


def event_probability(rho: Matrix, n: int, noise: NoiseProfile) -> float:
    """``p(A_n z_n) = sum_{mu nu} a*_{n mu} a_{n nu} rho^{mu nu}_{nn}``."""
    rho = check_state(rho)
    _dims(rho, noise)
    _warn_completeness(rho, noise)
    a = noise.a[n]
    val = complex(a.conj() @ _block(rho, n, n, noise.d_E) @ a)
    if abs(val.imag) > 1e-12:
        raise StateError(f"probability has imaginary part {val.imag:.3g}")
    return val.real


def split_fq(rho: Matrix, n: int, noise: NoiseProfile) -> tuple[float, float]:
    """Diagonal (classical) part ``f`` and noise interference ``q = p - f``."""
    p = event_probability(rho, n, noise)
    diag = np.real(np.diag(_block(rho, n, n, noise.d_E)))
    f = float(np.sum(np.abs(noise.a[n]) ** 2 * diag))
    return f, p - f


def decohere(rho: Matrix, d_A: int, d_E: int) -> Matrix:
    """Zero every noise off-diagonal element ``rho^{mu nu}_{mn}`` with ``mu != nu``."""
    r = np.asarray(rho, dtype=complex).reshape(d_A, d_E, d_A, d_E)
    keep = np.eye(d_E, dtype=bool)[None, :, None, :]
    return np.where(keep, r, 0.0).reshape(d_A * d_E, d_A * d_E)


def superposition_probability(
    rho: Matrix,
    c_m: complex,
    c_n: complex,
    indices: tuple[int, int],
    noise: NoiseProfile,
) -> float:
    """Probability of the composite event ``c_m |A_m z_m> + c_n |A_n z_n>``.

    Evaluated term by term: the two diagonal probabilities plus
    ``2 Re(c_m* c_n sum a*_{m mu} a_{n nu} rho^{mu nu}_{mn})``.
    """
    m, n = indices
    if m == n:
        raise ValueError("superposition needs two distinct alternatives")
    norm = abs(c_m) ** 2 + abs(c_n) ** 2
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"|c_m|^2 + |c_n|^2 = {norm}, expected 1")
    rho = check_state(rho)
    _dims(rho, noise)
    d_E = noise.d_E

    def amp(i: int, j: int) -> complex:
        return complex(noise.a[i].conj() @ _block(rho, i, j, d_E) @ noise.a[j])

    cross = 2.0 * (np.conj(c_m) * c_n * amp(m, n)).real
    return float(abs(c_m) ** 2 * amp(m, m).real + abs(c_n) ** 2 * amp(n, n).real + cross)


def entanglement_production(rho: Matrix, d_A: int, d_E: int) -> float:
    """``log[ sup rho^{mu mu}_{nn} / (sup_n sum_mu ...)(sup_mu sum_n ...) ]`` from the diagonal."""
    r = np.asarray(rho)
    if r.shape != (d_A * d_E, d_A * d_E):
        raise StateError(f"state shape {r.shape} does not match d_A*d_E = {d_A * d_E}")
    D = np.real(np.diag(r)).reshape(d_A, d_E)
    return float(math.log(D.max() / (D.sum(axis=1).max() * D.sum(axis=0).max())))


def separable_state(weights: Sequence[float], rho_A: Sequence[Matrix], rho_E: Sequence[Matrix]) -> Matrix:
    """``sum_i lambda_i rho_A^i (x) rho_E^i``."""
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        raise StateError(f"weights must be a distribution, got {w}")
    if not (len(w) == len(rho_A) == len(rho_E)):
        raise StateError("weights and factor states differ in number")
    return check_state(sum(wi * np.kron(a, e) for wi, a, e in zip(w, rho_A, rho_E)))


def schmidt_rank(vector: Matrix, d_A: int, d_E: int, tol: float = 1e-10) -> int:
    """Number of Schmidt coefficients above ``tol`` times the largest; 1 means a product vector."""
    s = np.linalg.svd(np.asarray(vector).reshape(d_A, d_E), compute_uv=False)
    return int(np.sum(s > tol * s[0])) if s[0] > 0 else 0


def luders_reduce(rho: Matrix, projector: Matrix) -> Matrix:
    """``P rho P / Tr(rho P)``."""
    rho = check_state(rho)
    P = np.asarray(projector, dtype=complex)
    if P.shape != rho.shape:
        raise StateError(f"projector shape {P.shape} does not match state {rho.shape}")
    tr = float(np.real(np.trace(rho @ P)))
    if tr <= ZERO_PROBABILITY:
        raise ZeroProbabilityError(f"event has probability {tr:.3g}; cannot condition on it")
    out = P @ rho @ P / tr
    out = 0.5 * (out + out.conj().T)
    return check_state(out)


def consecutive_probabilities(
    rho0: Matrix, U: Unitary | Matrix, P_first: Matrix, P_second: Matrix
) -> tuple[float, float]:
    """Joint ``Tr(U P1 rho P1 U^dag P2)`` and conditional ``joint / Tr(rho P1)``."""
    rho0 = check_state(rho0)
    u = U.u if isinstance(U, Unitary) else Unitary(U).u
    if u.shape != rho0.shape or P_first.shape != rho0.shape or P_second.shape != rho0.shape:
        raise StateError("state, unitary and projectors must share one dimension")
    first = float(np.real(np.trace(rho0 @ P_first)))
    joint = float(np.real(np.trace(u @ P_first @ rho0 @ P_first @ u.conj().T @ P_second)))
    if first <= ZERO_PROBABILITY:
        raise ZeroProbabilityError(f"first event has probability {first:.3g}")
    return joint, joint / first


def synchronous_probability(rho: Matrix, P_A: Matrix, P_B: Matrix) -> float:
    """``Tr(rho P_A (x) P_B)`` for an event in each of two spaces."""
    r = check_state(rho)
    if P_A.shape[0] * P_B.shape[0] != r.shape[0]:
        raise StateError(f"projector dimensions {P_A.shape[0]} x {P_B.shape[0]} do not match state {r.shape[0]}")
    return float(np.real(np.trace(r @ np.kron(P_A, P_B))))


def swap_function(ab: Sequence[Sequence[float]], ba: Sequence[Sequence[float]] | None = None) -> float:
    """``p(A1 B2) - p(B2 A1) + p(A2 B1) - p(B1 A2)``.

    ``ab[n][k]`` is the joint probability with ``A_n`` listed first and
    ``ba[k][n]`` the one with ``B_k`` first.  When ``ba`` is omitted the family
    is order-symmetric and ``ba`` is ``ab`` transposed.
    """
    x = np.asarray(ab, dtype=float)
    y = x.T if ba is None else np.asarray(ba, dtype=float)
    if x.shape != (2, 2) or y.shape != (2, 2):
        raise ValueError("swap function needs 2x2 tables")
    return float(x[0, 1] - y[1, 0] + x[1, 0] - y[0, 1])


def master_equation_2x2(gamma1: float, gamma2: float, f0: Sequence[Sequence[float]], t: float) -> NDArray[np.float64]:
    """Conditional table ``f[k][n] = f(B_k, t | A_n, t0)`` of the two-state master equation.

    ``gamma1`` is the rate into ``B_1`` and ``gamma2`` into ``B_2``; ``t`` is
    measured from ``t0``.  ``t = 0`` and ``t = inf`` return the exact limits.
    """
    if gamma1 < 0 or gamma2 < 0:
        raise ValueError("rates must be nonnegative")
    if t < 0:
        raise ValueError("t must be nonnegative")
    f = np.asarray(f0, dtype=float)
    if f.shape != (2, 2) or np.any(np.abs(f.sum(axis=0) - 1.0) > 1e-12):
        raise ValueError(f"initial table must be 2x2 with normalized columns, got {f.tolist()}")
    g = gamma1 + gamma2
    if g == 0:
        warnings.warn("both rates are zero; the solution is constant", DegenerateRatesWarning, stacklevel=2)
        return f.copy()
    if t == 0:
        return f.copy()
    limit = np.array([[gamma1 / g] * 2, [gamma2 / g] * 2])
    if math.isinf(t):
        return limit
    return (f - limit) * math.exp(-g * t) + limit


# --- random instances ------------------------------------------------------------


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> Matrix:
    """``A A^dag / Tr`` with complex Gaussian ``A`` of shape ``d x rank``."""
    k = d if rank is None else rank
    a = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    r = a @ a.conj().T
    r = 0.5 * (r + r.conj().T)
    return r / np.trace(r).real


def random_noise(d_A: int, d_E: int, rng: np.random.Generator) -> NoiseProfile:
    a = rng.normal(size=(d_A, d_E)) + 1j * rng.normal(size=(d_A, d_E))
    return NoiseProfile(a / np.linalg.norm(a, axis=1, keepdims=True))


def random_unitary(d: int, rng: np.random.Generator) -> Unitary:
    if d == 1:
        return Unitary(np.exp(2j * math.pi * rng.random()).reshape(1, 1))
    return Unitary(unitary_group.rvs(d, random_state=rng))


def complete_state(noise: NoiseProfile, sigma: Matrix) -> Matrix:
    """``V sigma V^dag`` with ``V`` the decorated isometry.

    Such states are exactly the ones complete on average for ``noise``: a
    trace-one state gives ``sum_n p(A_n z_n) = 1`` only if it lives on the
    span of the decorated vectors.
    """
    v = noise.isometry()
    s = np.asarray(sigma, dtype=complex)
    if s.shape != (noise.d_A, noise.d_A):
        raise StateError(f"sigma must be {noise.d_A}x{noise.d_A}")
    r = v @ s @ v.conj().T
    return check_state(0.5 * (r + r.conj().T))


# --- property suite ---------------------------------------------------------------


@dataclass(frozen=True)
class PropertyResult:
    name: str
    instances: int
    failures: int
    worst: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.failures == 0


@dataclass(frozen=True)
class SuiteReport:
    seed: int
    results: tuple[PropertyResult, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)


def _dims_for(rng: np.random.Generator) -> tuple[int, int]:
    return int(rng.integers(2, 5)), int(rng.integers(1, 5))


def _prop_normalization(rng: np.random.Generator) -> float:
    d_A, d_E = _dims_for(rng)
    noise = random_noise(d_A, d_E, rng)
    rho = complete_state(noise, random_density(d_A, rng))
    return abs(sum(event_probability(rho, n, noise) for n in range(d_A)) - 1.0)


def _prop_single_mode(rng: np.random.Generator) -> float:
    d_A, d_E = _dims_for(rng)
    noise = NoiseProfile.single_mode(d_A, d_E, int(rng.integers(d_E)))
    rho = complete_state(noise, random_density(d_A, rng))
    worst = 0.0
    for n in range(d_A):
        f, q = split_fq(rho, n, noise)
        worst = max(worst, abs(q), abs(f + q - event_probability(rho, n, noise)))
    return worst


def _two_bases(rng: np.random.Generator) -> tuple[NoiseProfile, list[Matrix], list[Matrix], Matrix]:
    """Decorated A-events and B-events sharing one two-dimensional span."""
    d_E = int(rng.integers(1, 4))
    noise = random_noise(2, d_E, rng)
    v = noise.isometry()
    w = random_unitary(2, rng).u
    PA = [np.outer(v[:, n], v[:, n].conj()) for n in range(2)]
    vb = v @ w
    PB = [np.outer(vb[:, k], vb[:, k].conj()) for k in range(2)]
    rho = complete_state(noise, random_density(2, rng))
    return noise, PA, PB, rho


def _prop_swap_consecutive(rng: np.random.Generator) -> float:
    _, PA, PB, rho = _two_bases(rng)
    eye = Unitary.identity(rho.shape[0])
    # ab[n][k]: A_n measured right after B_k; ba[k][n]: the reverse order
    ab = [[consecutive_probabilities(rho, eye, PB[k], PA[n])[0] for k in range(2)] for n in range(2)]
    ba = [[consecutive_probabilities(rho, eye, PA[n], PB[k])[0] for n in range(2)] for k in range(2)]
    cond_ab = [[consecutive_probabilities(rho, eye, PB[k], PA[n])[1] for k in range(2)] for n in range(2)]
    cond_ba = [[consecutive_probabilities(rho, eye, PA[n], PB[k])[1] for n in range(2)] for k in range(2)]
    sym = float(np.max(np.abs(np.array(cond_ab) - np.array(cond_ba).T)))
    return max(abs(swap_function(ab, ba)), sym)


def _prop_swap_synchronous(rng: np.random.Generator) -> float:
    dA, dB = int(rng.integers(2, 4)), int(rng.integers(2, 4))
    rho = random_density(dA * dB, rng)
    ua, ub = random_unitary(dA, rng).u, random_unitary(dB, rng).u
    PA = [np.outer(ua[:, n], ua[:, n].conj()) for n in range(2)]
    PB = [np.outer(ub[:, k], ub[:, k].conj()) for k in range(2)]
    IA, IB = np.eye(dA), np.eye(dB)
    ab = [[synchronous_probability(rho, PA[n], PB[k]) for k in range(2)] for n in range(2)]
    # the reverse order applies the B event first
    ba = [[float(np.real(np.trace(rho @ np.kron(IA, PB[k]) @ np.kron(PA[n], IB)))) for n in range(2)] for k in range(2)]
    return abs(swap_function(ab, ba))


def _prop_swap_classical(rng: np.random.Generator) -> float:
    joint = rng.random((2, 2))
    joint /= joint.sum()
    return abs(swap_function(joint, joint.T))


def _prop_luders(rng: np.random.Generator) -> float:
    d_A, d_E = _dims_for(rng)
    noise = random_noise(d_A, d_E, rng)
    rho = complete_state(noise, random_density(d_A, rng))
    worst = 0.0
    for n in range(d_A):
        red = luders_reduce(rho, decorated_projector(n, noise))
        for k in range(d_A):
            worst = max(worst, abs(event_probability(red, k, noise) - (1.0 if k == n else 0.0)))
    return worst


def _prop_entanglement(rng: np.random.Generator) -> float:
    d_A, d_E = _dims_for(rng)
    a = rng.random(d_A) + 0.01
    b = rng.random(d_E) + 0.01
    prod = np.diag(np.kron(a / a.sum(), b / b.sum())).astype(complex)
    d = int(rng.integers(2, 6))
    corr = np.zeros((d * d, d * d), dtype=complex)
    for n in range(d):
        corr[n * d + n, n * d + n] = 1.0 / d
    return max(abs(entanglement_production(prod, d_A, d_E)), abs(entanglement_production(corr, d, d) - math.log(d)))


def _prop_master_limits(rng: np.random.Generator) -> float:
    g1, g2 = rng.random(2) * 3 + 0.01
    col = rng.random(2)
    f0 = np.array([col, 1.0 - col])
    start = master_equation_2x2(g1, g2, f0, 0.0)
    end = master_equation_2x2(g1, g2, f0, math.inf)
    limit = np.array([[g1 / (g1 + g2)] * 2, [g2 / (g1 + g2)] * 2])
    exact = np.array_equal(start, f0) and np.array_equal(end, limit)
    return 0.0 if exact else 1.0


def _prop_classical_asymmetry(rng: np.random.Generator) -> float:
    """Returns 0 when the reversed-order conditional differs (the expected outcome)."""
    g1, g2, a1, a2 = rng.random(4) * 3 + 0.01
    cf, cg = rng.random(2), rng.random(2)
    t = float(rng.random() * 2 + 0.1)
    fwd = master_equation_2x2(g1, g2, np.array([cf, 1 - cf]), t)
    rev = master_equation_2x2(a1, a2, np.array([cg, 1 - cg]), t)
    gap = float(np.max(np.abs(fwd - rev.T)))
    return 0.0 if gap > 1e-6 else 1.0


PROPERTIES: tuple[tuple[str, Callable[[np.random.Generator], float], float], ...] = (
    ("normalization", _prop_normalization, 1e-12),
    ("single_mode_q_zero", _prop_single_mode, 1e-12),
    ("swap_consecutive", _prop_swap_consecutive, 1e-12),
    ("swap_synchronous", _prop_swap_synchronous, 1e-12),
    ("swap_classical", _prop_swap_classical, 1e-12),
    ("luders_reproducibility", _prop_luders, 1e-12),
    ("entanglement_production", _prop_entanglement, 1e-12),
    ("master_limits", _prop_master_limits, 0.0),
    ("classical_order_asymmetry", _prop_classical_asymmetry, 0.0),
)


def verify_suite(seed: int = 0, instances: int = 100) -> SuiteReport:
    """Run every property on ``instances`` seeded random cases each."""
    results = []
    for (name, prop, tol), ss in zip(PROPERTIES, np.random.SeedSequence(seed).spawn(len(PROPERTIES))):
        worst, failures = 0.0, 0
        for child in ss.spawn(instances):
            err = prop(np.random.default_rng(child))
            worst = max(worst, err)
            failures += err > tol
        results.append(PropertyResult(name, instances, failures, worst, tol))
    return SuiteReport(seed, tuple(results))
