"""Mean stress under die-to-die activation-energy variation.

The stress diffusivity scales with xi = exp(-dEa/kT) when the activation
energy shifts by dEa.  For Ea ~ Normal(Ea0, var_Ea) the mean of xi exceeds 1
by lambda = exp(var_Ea/(2 (kT)^2)) - 1, and a first-order perturbation of the
Laplace-domain nodal system gives the mean stress shift in closed form from
the nominal moments: m_k = -k*lambda*M_k.  The time-domain shift is
reconstructed from those moments by asymptotic waveform evaluation (a Pade
fit of the moment series), and added to the nominal transient response.

A Monte Carlo oracle over the same discretized system provides an
independent statistical check; its default backend diagonalizes the
generalized eigenproblem once and replays the identical backward-Euler
recurrence for every sample, so it matches a literal re-solve to rounding.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .core import BOLTZMANN_EV, InterconnectGraph, MaterialParams, derived_params
from .dc import solve_dc
from .transient import DiscretizedSystem, discretize, step_transient

__all__ = [
    "MomentSet", "compute_lambda", "nominal_moments", "perturbation_moments",
    "mean_stress_shift", "monte_carlo_oracle", "MonteCarloResult", "mc_time_grid",
    "reconstruct_from_moments",
]


def compute_lambda(p: MaterialParams) -> float:
    """lambda = exp(var_Ea / (2 (kT)^2)) - 1, the mean excess of the
    diffusivity scale factor across dies."""
    kt = BOLTZMANN_EV * p.temperature
    return math.expm1(p.var_Ea / (2.0 * kt * kt))


@dataclass(frozen=True)
class MomentSet:
    """Laplace-domain moments of the nodal stress deviation (sigma - sigma_T).

    nominal[k] is M_k; perturbation[k] is m_k, the first-order moment shift
    of the mean across dies.  Shapes are [order+1, mesh_count].
    """

    order: int
    nominal: np.ndarray
    perturbation: np.ndarray
    lam: float


def _bordered_solver(sys: DiscretizedSystem):
    """LU of [[G, C1], [C1^T, 0]]; enforces zero C-weighted deviation.

    The stress deviation from sigma_T carries no net metal volume at any
    time, so each moment vector must be C-orthogonal to the constant; the
    bordered row makes the singular Laplacian uniquely solvable.
    """
    n = sys.mesh_count
    c_col = sp.csc_matrix(sys.C.reshape(n, 1))
    upper = sp.hstack([sys.G.tocsc(), c_col])
    lower = sp.hstack([c_col.T, sp.csc_matrix((1, 1))])
    big = sp.vstack([upper, lower]).tocsc()
    lu = spla.splu(big)

    def solve(rhs: np.ndarray) -> np.ndarray:
        full = np.concatenate([rhs, [0.0]])
        out = lu.solve(full)
        return out[:n]

    return solve


def nominal_moments(sys: DiscretizedSystem, order: int) -> np.ndarray:
    """Moments of the nominal response: G M_0 = J, G M_k = -C M_{k-1}.

    M_0 equals the steady-state deviation profile; higher moments carry
    the transient shape.  Each solve is pinned by mass conservation.
    """
    if order < 0:
        raise ValueError("order must be non-negative")
    solve = _bordered_solver(sys)
    n = sys.mesh_count
    M = np.zeros((order + 1, n))
    M[0] = solve(sys.J)
    for k in range(1, order + 1):
        M[k] = solve(-sys.C * M[k - 1])
    return M


def perturbation_moments(sys: DiscretizedSystem, nominal: np.ndarray,
                         lam: float, check_tol: float = 1e-8) -> np.ndarray:
    """First-order mean-shift moments via the recursion
    G m_k = lambda C M_{k-1} - C m_{k-1}, m_0 = 0.

    The recursion telescopes to the closed form m_k = -k*lambda*M_k; both
    routes are computed and cross-checked here (relative tolerance
    `check_tol` against the k*lambda*M_k scale) before returning the
    recursion result.
    """
    order = nominal.shape[0] - 1
    solve = _bordered_solver(sys)
    m = np.zeros_like(nominal)
    for k in range(1, order + 1):
        m[k] = solve(lam * sys.C * nominal[k - 1] - sys.C * m[k - 1])
        closed = -k * lam * nominal[k]
        scale = np.max(np.abs(closed))
        if scale > 0.0:
            err = np.max(np.abs(m[k] - closed)) / scale
            if err > check_tol:
                raise RuntimeError(
                    f"perturbation-moment self-check failed at k={k}: "
                    f"recursion vs closed form differ by {err:.3e} relative")
    return m


def moment_set(sys: DiscretizedSystem, p: MaterialParams,
               order: int = 8) -> MomentSet:
    lam = compute_lambda(p)
    M = nominal_moments(sys, order)
    m = perturbation_moments(sys, M, lam)
    return MomentSet(order=order, nominal=M, perturbation=m, lam=lam)


# ----------------------------------------------------------------------------
# Moment-to-time reconstruction (asymptotic waveform evaluation)
# ----------------------------------------------------------------------------


def _awe_poles_residues(c: np.ndarray, q: int):
    """Fit c_k = sum_j r_j y_j^k (k = 1..2q) with y_j = 1/p_j.

    Returns (poles p_j, residues r_j) of sum_j r_j/(s - p_j) whose Taylor
    series at s = 0 reproduces the moments.  Raises LinAlgError for a
    singular Hankel system; callers fall back to lower orders.
    """
    # scale so the Hankel entries are O(1)
    tau = abs(c[1] / c[0]) if c[0] != 0 else 1.0
    if tau == 0 or not math.isfinite(tau):
        tau = 1.0
    ch = np.array([c[k] / tau ** (k + 1) for k in range(2 * q)])

    H = np.empty((q, q))
    for i in range(q):
        H[i] = ch[i:i + q]
    rhs = -ch[q:2 * q]
    a = np.linalg.solve(H, rhs)
    # poly y^q + a[q-1] y^{q-1} + ... + a[0]
    roots = np.roots(np.concatenate([[1.0], a[::-1]]))
    ys = roots * tau
    if np.any(ys == 0):
        raise np.linalg.LinAlgError("zero root in moment fit")
    V = np.vander(roots, N=q + 1, increasing=True)[:, 1:q + 1].T
    r = np.linalg.solve(V, ch[:q])
    return 1.0 / ys, r


def _stable_fit(c: np.ndarray, q: int):
    """Poles/residues with unstable poles discarded and residues refit."""
    poles, res = _awe_poles_residues(c, q)
    stable = poles.real < 0
    if stable.all():
        return poles, res
    warnings.warn(
        f"moment fit produced {int((~stable).sum())} unstable pole(s); "
        "discarding and refitting residues", RuntimeWarning)
    poles = poles[stable]
    if poles.size == 0:
        raise np.linalg.LinAlgError("no stable poles")
    k = np.arange(1, len(c) + 1)
    A = (1.0 / poles[None, :]) ** k[:, None]
    res, *_ = np.linalg.lstsq(A, c, rcond=None)
    return poles, res


def reconstruct_from_moments(c: np.ndarray, times: np.ndarray,
                             q: Optional[int] = None) -> np.ndarray:
    """Time response sum_j r_j exp(p_j t) whose moments are c_1..c_K.

    c[k-1] holds the k-th moment (there is no constant term; the response
    decays to zero).  q defaults to ceil(K/2) poles and steps down
    automatically when the moment matrix is rank deficient.
    """
    c = np.asarray(c, dtype=float)
    times = np.asarray(times, dtype=float)
    if not np.any(c):
        return np.zeros_like(times)
    K = len(c)
    q0 = q if q is not None else (K + 1) // 2
    last_err: Exception | None = None
    for qq in range(min(q0, K // 2), 0, -1):
        try:
            poles, res = _stable_fit(c[:2 * qq], qq)
        except np.linalg.LinAlgError as e:
            last_err = e
            continue
        out = np.zeros_like(times, dtype=complex)
        for pj, rj in zip(poles, res):
            out += rj * np.exp(pj * times)
        return out.real
    raise RuntimeError(f"moment reconstruction failed at all orders: {last_err}")


def mean_stress_shift(sys: DiscretizedSystem, p: MaterialParams,
                      times: Sequence[float], order: int = 8,
                      nominal_trace: Optional[np.ndarray] = None) -> dict:
    """Mean stress across dies at the graph nodes of `sys`.

    Returns a dict with 'times', 'node_ids', 'nominal', 'shift' and 'mean'
    arrays; mean = nominal + shift to first order in lambda.  The nominal
    trace comes from the transient solver on the same time points (pass
    `nominal_trace` with shape [n_times, n_graph] to reuse one); the shift is
    reconstructed from the perturbation moments per node.
    """
    times = np.asarray(sorted(float(t) for t in times))
    ms = moment_set(sys, p, order=order)
    n_graph = sys.graph_count

    shift = np.zeros((len(times), n_graph))
    for i in range(n_graph):
        # c_k = -m_k so that the fitted response's Taylor moments match
        c = -ms.perturbation[1:, i]
        shift[:, i] = reconstruct_from_moments(c, times)

    if nominal_trace is None:
        t_end = float(times[-1]) if times[-1] > 0 else 1.0
        trace = step_transient(sys, p, t_end,
                               sample_times=[t for t in times if t > 0])
        rows = []
        k = 0
        for t in times:
            if t == 0.0:
                rows.append(np.full(n_graph, p.sigma_T))
            else:
                rows.append(trace.stress[k, :n_graph])
                k += 1
        nominal = np.vstack(rows)
    else:
        nominal = np.asarray(nominal_trace, dtype=float)
        if nominal.shape != (len(times), n_graph):
            raise ValueError("nominal_trace shape mismatch")

    return {
        "times": times,
        "node_ids": list(sys.node_ids),
        "nominal": nominal,
        "shift": shift,
        "mean": nominal + shift,
        "lambda": ms.lam,
        "moments": ms,
    }


# ----------------------------------------------------------------------------
# Monte Carlo oracle
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class MonteCarloResult:
    """Sample statistics of the stress at graph nodes across dies."""

    times: np.ndarray
    node_ids: tuple[str, ...]
    mean: np.ndarray     # [n_times, n_graph]
    stderr: np.ndarray   # standard error of the mean, same shape
    n_samples: int
    seed: int


def mc_time_grid(times: np.ndarray, steps_per_decade: int = 40) -> np.ndarray:
    """Geometric step grid resolving [t_min/100, t_max], containing `times`."""
    t_max = float(times[-1])
    positive = times[times > 0]
    t_lo = float(positive[0]) / 100.0 if positive.size else t_max * 1e-6
    n_dec = max(1.0, math.log10(t_max / t_lo))
    n_pts = int(math.ceil(n_dec * steps_per_decade))
    grid = np.geomspace(t_lo, t_max, n_pts)
    grid = np.unique(np.concatenate([grid, positive]))
    return grid


def monte_carlo_oracle(g: InterconnectGraph, p: MaterialParams,
                       n_samples: int, seed: int,
                       times: Sequence[float],
                       dx_target: Optional[float] = None,
                       backend: str = "modal") -> MonteCarloResult:
    """Monte Carlo mean stress across dies with Ea ~ Normal(Ea, var_Ea).

    Every sample scales the stress diffusivity by xi = exp(-dEa/kT) and
    replays the same backward-Euler recurrence on the same step grid, so
    backend 'modal' (one generalized eigendecomposition, all samples
    vectorized) and backend 'resolve' (a literal re-run of step_transient
    per sample) agree to rounding.  Statistics are reduced in sample-index
    order for a fixed seed, making results reproducible bit for bit.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    times = np.asarray(sorted(float(t) for t in times))
    if times.size == 0 or times[-1] <= 0:
        raise ValueError("need at least one positive sample time")

    kt = BOLTZMANN_EV * p.temperature
    rng = np.random.default_rng(seed)
    d_ea = rng.normal(0.0, math.sqrt(p.var_Ea), size=n_samples)
    xi = np.exp(-d_ea / kt)

    dc = solve_dc(g, p)
    sys = discretize(g, dc, p, dx_target=dx_target)
    grid = mc_time_grid(times)
    n_graph = sys.graph_count

    if backend == "modal":
        stress = _mc_modal(sys, p, xi, grid, times)
    elif backend == "resolve":
        stress = _mc_resolve(g, p, d_ea, dx_target, grid, times, n_graph)
    else:
        raise ValueError("backend must be 'modal' or 'resolve'")

    # center on the first sample so identical samples reduce to exact zeros
    dev = stress - stress[0]
    mean = stress[0] + dev.mean(axis=0)
    sd = np.sqrt(((stress - mean) ** 2).sum(axis=0) / (n_samples - 1))
    stderr = sd / math.sqrt(n_samples)
    return MonteCarloResult(times=times, node_ids=sys.node_ids,
                            mean=mean, stderr=stderr,
                            n_samples=n_samples, seed=seed)


def _mc_modal(sys: DiscretizedSystem, p: MaterialParams, xi: np.ndarray,
              grid: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Vectorized backward Euler in the generalized eigenbasis of (G, C)."""
    G = sys.G.toarray()
    C = np.diag(sys.C)
    w, phi = scipy.linalg.eigh(G, C)       # G phi = C phi w, phi^T C phi = I
    w = np.clip(w, 0.0, None)
    f = phi.T @ sys.J                      # modal forcing
    # initial deviation from sigma_T is zero, so modal state starts at zero
    y = np.zeros((len(xi), len(w)))
    out = np.zeros((len(xi), len(times), sys.graph_count))
    phi_g = phi[:sys.graph_count]

    want = {float(t): i for i, t in enumerate(times)}
    if 0.0 in want:
        out[:, want[0.0], :] = p.sigma_T

    t_prev = 0.0
    for t in grid:
        dt = t - t_prev
        denom = 1.0 + np.outer(xi, w) * dt           # [samples, modes]
        y = (y + dt * np.outer(xi, f)) / denom
        t_prev = t
        key = float(t)
        if key in want:
            out[:, want[key], :] = p.sigma_T + y @ phi_g.T
    return out


def _mc_resolve(g: InterconnectGraph, p: MaterialParams, d_ea: np.ndarray,
                dx_target: Optional[float], grid: np.ndarray,
                times: np.ndarray, n_graph: int) -> np.ndarray:
    out = np.zeros((len(d_ea), len(times), n_graph))
    for s, de in enumerate(d_ea):
        ps = replace(p, Ea=p.Ea + float(de))
        dcs = solve_dc(g, ps)
        syss = discretize(g, dcs, ps, dx_target=dx_target)
        trace = step_transient(syss, ps, float(grid[-1]), step_times=grid,
                               sample_times=[t for t in times if t > 0])
        k = 0
        for i, t in enumerate(times):
            if t == 0.0:
                out[s, i] = p.sigma_T
            else:
                out[s, i] = trace.stress[k, :n_graph]
                k += 1
    return out
