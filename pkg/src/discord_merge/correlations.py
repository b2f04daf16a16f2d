"""Mutual information, classical correlation, quantum discord, zero-discord test.

Classical correlation is the maximum over measurements on B of
S(A) - sum_i p_i S(rho_{A|i}); discord is total correlation minus that
maximum.  The default search space is rank-1 projective measurements, which
is where the minimum of the averaged conditional entropy is attained (the
objective is concave over the convex POVM set, so extreme points suffice).
For qubit B the search is a Bloch-angle grid with zoom and simplex polish;
for larger B a Givens-angle unitary parameterization is used.  A POVM search
is available behind an option and is reported as a lower bound.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from ._optimize import maximize_qubit_angles, maximize_unitary_params
from .core import (
    EIG_FLOOR,
    DensityMatrix,
    entropy_of_matrix,
    partial_trace,
    von_neumann_entropy,
)
from .errors import (
    DegenerateUndecided,
    DimensionMismatch,
    InvalidParams,
    OptimizerDidNotConverge,
)
from .measurement import (
    POVM,
    Measurement,
    conditional_entropy_measured,
    encode_measurement,
    measure_B,
    projective_from_unitary,
    projective_qubit,
    validate_measurement,
)

# Eigenvalue gap below which two eigenvalues of rho_B count as degenerate
# for the structural zero-discord test.
DEGENERACY_GAP = 1e-8


@dataclass(frozen=True)
class OptimizerConfig:
    """Knobs for the measurement search; defaults suit two-qubit states."""

    grid_theta: int = 24
    grid_phi: int = 48
    refinements: int = 3
    multistarts: int = 8
    tol_obj: float = 1e-7
    max_iter: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.grid_theta < 2 or self.grid_phi < 2:
            raise InvalidParams("grid counts must be >= 2")
        if self.tol_obj <= 0:
            raise InvalidParams("tol_obj must be positive")


DEFAULT_CONFIG = OptimizerConfig()


@dataclass(frozen=True, eq=False)
class DiscordResult:
    """Total, classical, and quantum correlations with optimizer diagnostics.

    ``discord`` equals ``mutual_info - classical_corr`` by construction.
    ``markup_check`` is the residual of the conditional-entropy identity
    D = S'(A|B) - S(A|B) evaluated at the optimal measurement through the
    plain ensemble formulas.  ``j_povm`` is only set when the POVM search was
    requested and is a lower bound on the true POVM optimum.
    """

    mutual_info: float
    classical_corr: float
    discord: float
    best_measurement: Measurement
    markup_check: float
    optimizer_trace: tuple
    converged: bool
    dims: tuple
    j_povm: float | None = None


@dataclass(frozen=True, eq=False)
class ZeroDiscordResult:
    zero: bool
    witness_basis: np.ndarray | None
    residual: float


def mutual_information(state: DensityMatrix) -> float:
    """S(A) + S(B) - S(A,B) in bits."""
    if state.n_subsystems != 2:
        raise DimensionMismatch(f"need a bipartite state, got dims {state.dims}")
    s_a = von_neumann_entropy(partial_trace(state, {0}))
    s_b = von_neumann_entropy(partial_trace(state, {1}))
    return s_a + s_b - von_neumann_entropy(state)


def _weighted_entropy_terms(eigs: np.ndarray) -> np.ndarray:
    """p * S(block/p) from eigenvalues of unnormalized blocks, batched.

    Uses p*S(A/p) = -sum_k mu_k log2 mu_k + p log2 p for eigenvalues mu of
    the unnormalized block A with trace p; outcomes with p at the floor
    contribute zero.
    """
    w = np.clip(np.real(eigs), 0.0, 1.0)
    p = w.sum(axis=-1)
    wl = np.where(w > EIG_FLOOR, w, 1.0)
    h_un = -(wl * np.log2(wl)).sum(axis=-1)
    pl = np.where(p > EIG_FLOOR, p, 1.0)
    return h_un + pl * np.log2(pl)


def _avg_conditional_entropy_batch(rho_t, rho_a, thetas, phis) -> np.ndarray:
    """sum_i p_i S(rho_{A|i}) for a batch of qubit Bloch measurements."""
    nx = np.sin(thetas) * np.cos(phis)
    ny = np.sin(thetas) * np.sin(phis)
    nz = np.cos(thetas)
    g = thetas.shape[0]
    proj = np.empty((g, 2, 2), dtype=complex)
    proj[:, 0, 0] = 0.5 * (1 + nz)
    proj[:, 0, 1] = 0.5 * (nx - 1j * ny)
    proj[:, 1, 0] = 0.5 * (nx + 1j * ny)
    proj[:, 1, 1] = 0.5 * (1 - nz)

    block_plus = np.einsum("gbe,aecb->gac", proj, rho_t)
    block_minus = rho_a[None, :, :] - block_plus
    eigs = np.linalg.eigvalsh(np.stack([block_plus, block_minus], axis=1))
    return _weighted_entropy_terms(eigs).sum(axis=1)


class _QubitObjective:
    """J(theta, phi) = S(A) - avg conditional entropy, vectorized over angles."""

    def __init__(self, state: DensityMatrix):
        da, db = state.dims
        self.rho_t = state.data.reshape(da, db, da, db)
        self.rho_a = partial_trace(state, {0}).data
        self.s_a = entropy_of_matrix(self.rho_a)

    def batch(self, thetas, phis):
        return self.s_a - _avg_conditional_entropy_batch(
            self.rho_t, self.rho_a, np.asarray(thetas), np.asarray(phis)
        )

    def scalar(self, theta, phi):
        return float(self.batch(np.array([theta]), np.array([phi]))[0])


def _stilde_for_measurement(state: DensityMatrix, m: Measurement) -> float:
    """Average conditional entropy via the plain ensemble formulas."""
    return conditional_entropy_measured(measure_B(state, m))


def _unitary_from_angles(d: int, params) -> np.ndarray:
    """Product of Givens rotations G(i,j; theta, phi) over pairs i<j."""
    u = np.eye(d, dtype=complex)
    it = iter(params)
    for i in range(d):
        for j in range(i + 1, d):
            theta, phi = next(it), next(it)
            g = np.eye(d, dtype=complex)
            c, s = np.cos(theta), np.sin(theta)
            g[i, i] = c
            g[j, j] = c
            g[i, j] = -np.exp(1j * phi) * s
            g[j, i] = np.exp(-1j * phi) * s
            u = g @ u
    return u


def _povm_from_angles(db: int, n: int, params) -> Measurement:
    """POVM with n outcomes from a Givens-parameterized dilation unitary.

    The big unitary W acts on B (x) an n-dimensional register; Kraus
    operators are M_i = (I (x) <i|) W (I (x) |0>), so completeness holds by
    construction for any parameter vector.
    """
    w = _unitary_from_angles(db * n, params)
    iso = w[:, 0::n]  # columns for |b>|0>
    elements = []
    for i in range(n):
        kraus = iso[i::n, :]
        elements.append(kraus.conj().T @ kraus)
    return Measurement(tuple(elements), POVM)


@dataclass(frozen=True)
class _JSearch:
    j: float
    measurement: Measurement
    trace: tuple
    converged: bool
    j_povm: float | None


def _maximize_j(state, cfg, povm=False, povm_outcomes=None) -> _JSearch:
    da, db = state.dims
    if db == 2:
        objective = _QubitObjective(state)
        run = maximize_qubit_angles(objective.batch, objective.scalar, cfg)
        best = projective_qubit(*run.params)
        j_proj, trace, converged = run.value, run.trace, run.converged
    else:
        s_a = von_neumann_entropy(partial_trace(state, {0}))

        def unitary_objective(params):
            m = projective_from_unitary(_unitary_from_angles(db, params))
            return s_a - _stilde_for_measurement(state, m)

        run = maximize_unitary_params(unitary_objective, db * (db - 1), cfg)
        best = projective_from_unitary(_unitary_from_angles(db, run.params))
        j_proj, trace, converged = run.value, run.trace, run.converged

    j_povm = None
    if povm:
        n = int(povm_outcomes) if povm_outcomes else db * db
        if not 2 <= n <= db * db:
            raise InvalidParams(f"POVM outcome count must lie in [2, {db * db}], got {n}")
        obj_state = state

        def povm_objective(params):
            m = _povm_from_angles(db, n, params)
            s_a = entropy_of_matrix(partial_trace(obj_state, {0}).data)
            return s_a - _stilde_for_measurement(obj_state, m)

        povm_run = maximize_unitary_params(povm_objective, db * n * (db * n - 1), cfg)
        j_povm = povm_run.value
        if j_povm > j_proj + cfg.tol_obj:
            best = _povm_from_angles(db, n, povm_run.params)
            return _JSearch(j_povm, best, trace + povm_run.trace, converged, j_povm)

    return _JSearch(j_proj, best, trace, converged, j_povm)


def classical_correlation(state: DensityMatrix, cfg: OptimizerConfig = None,
                          *, povm: bool = False, povm_outcomes: int = None):
    """Maximal classical correlation J and the maximizing measurement.

    Deterministic given the config seed.  If the simplex polish hits its
    iteration budget the result is still returned and an
    :class:`OptimizerDidNotConverge` warning is emitted.
    """
    if state.n_subsystems != 2:
        raise DimensionMismatch(f"need a bipartite state, got dims {state.dims}")
    cfg = cfg or DEFAULT_CONFIG
    search = _maximize_j(state, cfg, povm, povm_outcomes)
    if not search.converged:
        warnings.warn(
            "measurement search hit its iteration budget; result may be a local optimum",
            OptimizerDidNotConverge,
        )
    return search.j, search.measurement


def discord(state: DensityMatrix, cfg: OptimizerConfig = None,
            *, povm: bool = False, povm_outcomes: int = None) -> DiscordResult:
    """Quantum discord D = I(A:B) - J via the measurement optimization.

    The returned record carries the optimum measurement, the residual of the
    conditional-entropy identity at that measurement, and the optimizer
    trace.  Single-copy values are reported; no regularization is attempted.
    """
    if state.n_subsystems != 2:
        raise DimensionMismatch(f"need a bipartite state, got dims {state.dims}")
    cfg = cfg or DEFAULT_CONFIG
    info = mutual_information(state)
    search = _maximize_j(state, cfg, povm, povm_outcomes)
    d = info - search.j

    stilde = _stilde_for_measurement(state, search.measurement)
    s_cond = von_neumann_entropy(state) - von_neumann_entropy(partial_trace(state, {1}))
    markup_check = abs(d - (stilde - s_cond))

    if not search.converged:
        warnings.warn(
            "measurement search hit its iteration budget; result may be a local optimum",
            OptimizerDidNotConverge,
        )
    return DiscordResult(
        mutual_info=info,
        classical_corr=search.j,
        discord=d,
        best_measurement=search.measurement,
        markup_check=markup_check,
        optimizer_trace=search.trace,
        converged=search.converged,
        dims=state.dims,
        j_povm=search.j_povm,
    )


def discord_via_markup(state: DensityMatrix, cfg: OptimizerConfig = None) -> float:
    """Discord as the minimal increase of conditional entropy under measurement.

    Minimizes sum_j p_j S(rho_{A|j}) over measurements through the plain
    ensemble formulas (not the vectorized objective) and returns that minimum
    minus S(A|B).  Agrees with :func:`discord` within 1e-6; the deliberately
    separate evaluation path is what makes the agreement a real check.
    """
    if state.n_subsystems != 2:
        raise DimensionMismatch(f"need a bipartite state, got dims {state.dims}")
    cfg = cfg or DEFAULT_CONFIG
    da, db = state.dims

    if db == 2:
        def neg_stilde(theta, phi):
            return -_stilde_for_measurement(state, projective_qubit(theta, phi))

        def neg_stilde_batch(thetas, phis):
            return np.array([neg_stilde(t, p) for t, p in zip(thetas, phis)])

        run = maximize_qubit_angles(neg_stilde_batch, neg_stilde, cfg)
    else:
        def neg_stilde_unitary(params):
            m = projective_from_unitary(_unitary_from_angles(db, params))
            return -_stilde_for_measurement(state, m)

        run = maximize_unitary_params(neg_stilde_unitary, db * (db - 1), cfg)

    stilde_min = -run.value
    s_cond = von_neumann_entropy(state) - von_neumann_entropy(partial_trace(state, {1}))
    return stilde_min - s_cond


def _b_blocks(state: DensityMatrix, basis: np.ndarray) -> np.ndarray:
    """T[i, j] = (I (x) <b_i|) rho (I (x) |b_j>) for basis columns b_k."""
    da, db = state.dims
    rho_t = state.data.reshape(da, db, da, db)
    return np.einsum("bi,abcd,dj->ijac", basis.conj(), rho_t, basis)


def _group_degenerate(eigenvalues: np.ndarray):
    groups, current = [], [0]
    for k in range(1, eigenvalues.size):
        if abs(eigenvalues[k] - eigenvalues[current[-1]]) <= DEGENERACY_GAP:
            current.append(k)
        else:
            groups.append(current)
            current = [k]
    groups.append(current)
    return groups


def is_zero_discord(state: DensityMatrix, tol: float = 1e-9) -> ZeroDiscordResult:
    """Structural test: is the state block diagonal in an eigenbasis of rho_B?

    Diagonalizes rho_B and checks that all off-diagonal B-blocks of the joint
    state vanish.  Inside degenerate eigenspaces the test searches for a
    rotation that simultaneously diagonalizes the block pencil (via a generic
    Hermitian combination).  Returns the witness basis when the state is
    classical on B.

    Raises :class:`DegenerateUndecided` when a degenerate eigenspace leaves a
    joint-diagonalization residual in (tol, 10*tol); callers should fall back
    to an optimization-based discord bound.
    """
    if state.n_subsystems != 2:
        raise DimensionMismatch(f"need a bipartite state, got dims {state.dims}")
    da, db = state.dims
    rho_b = partial_trace(state, {1}).data
    w, v = np.linalg.eigh(rho_b)
    order = np.argsort(w)[::-1]
    w, v = w[order], v[:, order]

    groups = _group_degenerate(w)
    blocks = _b_blocks(state, v)

    group_of = np.empty(db, dtype=int)
    for gi, g in enumerate(groups):
        group_of[np.asarray(g)] = gi
    cross = 0.0
    for i in range(db):
        for j in range(db):
            if group_of[i] != group_of[j]:
                cross = max(cross, float(np.max(np.abs(blocks[i, j]))))

    witness = v.copy()
    joint_residual = 0.0
    had_degenerate = False
    rng = np.random.Generator(np.random.Philox(key=20260810))
    for g in groups:
        if len(g) < 2:
            continue
        had_degenerate = True
        idx = np.asarray(g)
        pencil = blocks[np.ix_(idx, idx)]  # (s, s, da, da)
        s = len(g)
        herm = np.zeros((s, s), dtype=complex)
        for a in range(da):
            for c in range(da):
                m = pencil[:, :, a, c]
                alpha = rng.standard_normal()
                beta = rng.standard_normal()
                herm += alpha * (m + m.conj().T) + beta * 1j * (m - m.conj().T)
        _, rot = np.linalg.eigh(herm)
        rotated = np.einsum("ki,klac,lj->ijac", rot.conj(), pencil, rot)
        off = np.abs(rotated) * (1.0 - np.eye(s))[:, :, None, None]
        joint_residual = max(joint_residual, float(off.max()))
        witness[:, idx] = witness[:, idx] @ rot

    residual = max(cross, joint_residual)
    if cross <= tol and had_degenerate and tol < joint_residual <= 10 * tol:
        raise DegenerateUndecided(
            f"joint diagonalization residual {joint_residual:.3e} in ({tol}, {10 * tol})"
        )
    if residual <= tol:
        return ZeroDiscordResult(True, witness, residual)
    return ZeroDiscordResult(False, None, residual)


def discord_result_to_json(result: DiscordResult, verbose: bool = False) -> dict:
    out = {
        "mutual_info": result.mutual_info,
        "classical_corr": result.classical_corr,
        "discord": result.discord,
        "markup_check": result.markup_check,
        "converged": result.converged,
        "dims": list(result.dims),
        "best_measurement": encode_measurement(result.best_measurement),
    }
    if result.j_povm is not None:
        out["j_povm"] = result.j_povm
    if verbose:
        out["optimizer_trace"] = [
            {"params": list(p), "objective": v} for p, v in result.optimizer_trace
        ]
    return out
