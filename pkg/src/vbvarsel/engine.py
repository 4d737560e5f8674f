"""Annealed coordinate-ascent variational inference for the selection mixture.

One iteration updates, in order, the responsibilities ``r``, the selection
weights ``c`` (with the Beta factor on the selection probabilities implied
by ``c``), the Dirichlet parameters ``alpha`` and the Gaussian-Gamma
parameters ``(beta, m, a, b)``, then evaluates the annealed ELBO.  Every
temperature-scaled formula is written so that ``T == 1`` reproduces the
plain update bit for bit: offsets appear as ``(T - 1)``, which is an exact
zero, and division by ``T`` is exact.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._special import digamma, gammaln
from .exceptions import NonFiniteElbo, NumericalUnderflow
from .model import (
    DataMatrix,
    Hyperparameters,
    InitOptions,
    VariationalState,
    init_state,
    standardize,
)
from .schedule import ScheduleKind, TemperatureSchedule

logger = logging.getLogger(__name__)

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass
class FitResult:
    labels: np.ndarray
    selected: np.ndarray
    c: np.ndarray
    elbo_trace: list
    temperature_trace: list
    iterations: int
    converged: bool
    cluster_sizes: np.ndarray
    effective_k: int
    final_state: VariationalState
    warnings: list = field(default_factory=list)


def _values(data):
    return data.values if isinstance(data, DataMatrix) else np.asarray(data, dtype=np.float64)


def _xlogx(p):
    return np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)


def expected_log_weight(state: VariationalState, k: Optional[int] = None):
    """E[ln pi_k] under the Dirichlet factor; all k when ``k`` is None."""
    out = digamma(state.alpha) - digamma(state.alpha.sum())
    return out if k is None else float(out[k])


def expected_log_density(state: VariationalState, data) -> np.ndarray:
    """E[ln N(x_nj | mu_kj, 1/tau_kj)] as an (N, K, J) array."""
    x = _values(data)
    e_log_tau = digamma(state.a) - np.log(state.b)
    e_quad = (state.a / state.b)[None] * (x[:, None, :] - state.m[None]) ** 2 + (1.0 / state.beta)[None]
    return -0.5 * _LOG_2PI + 0.5 * e_log_tau[None] - 0.5 * e_quad


def null_log_density(state: VariationalState, data) -> np.ndarray:
    """ln N(x_nj | mu0_j, 1/tau0_j) as an (N, J) array."""
    x = _values(data)
    tau0 = state.null.tau0
    return -0.5 * _LOG_2PI + 0.5 * np.log(tau0) - 0.5 * tau0 * (x - state.null.mu0) ** 2


def log_rho(state: VariationalState, data, temperature: float = 1.0) -> np.ndarray:
    """Unnormalised log responsibilities, already divided by the temperature."""
    elf = expected_log_density(state, data)
    lf0 = null_log_density(state, data)
    c = state.c
    per_k = (elf * c).sum(axis=2) + ((1.0 - c) * lf0).sum(axis=1)[:, None]
    return (expected_log_weight(state)[None] + per_k) / temperature


def normalize_log_rows(log_rho: np.ndarray) -> np.ndarray:
    top = log_rho.max(axis=1, keepdims=True)
    if not np.all(np.isfinite(top)):
        raise NumericalUnderflow("a responsibility row is entirely -inf or NaN")
    w = np.exp(log_rho - top)
    return w / w.sum(axis=1, keepdims=True)


def update_responsibilities(state: VariationalState, data, temperature: float) -> VariationalState:
    r = normalize_log_rows(log_rho(state, data, temperature))
    return state.replace(r=r, temperature=temperature)


def _beta_factor(c, d0, temperature):
    """Parameters of the annealed Beta factor on the selection probability."""
    t_off = temperature - 1.0
    p1 = (c + d0 + t_off) / temperature
    p2 = ((temperature - c) + d0) / temperature
    total = (2.0 * d0 + 1.0 + 2.0 * t_off) / temperature
    return p1, p2, total


def expected_log_delta(c, d0, temperature: float = 1.0):
    """(E[ln delta_j], E[ln(1 - delta_j)]) under the annealed Beta factor."""
    p1, p2, total = _beta_factor(np.asarray(c, dtype=np.float64), d0, temperature)
    psi_total = digamma(total)
    return digamma(p1) - psi_total, digamma(p2) - psi_total


def logistic(z):
    z = np.asarray(z, dtype=np.float64)
    e = np.exp(-np.abs(z))
    return np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def selection_log_odds(state: VariationalState, data, d0: float, temperature: float):
    """(ln eta1_j, ln eta2_j); uses the responsibilities and ``c`` in ``state``."""
    elf = expected_log_density(state, data)
    lf0 = null_log_density(state, data)
    r = state.r
    e_ld, e_l1md = expected_log_delta(state.c, d0, temperature)
    fit_term = (r[:, :, None] * elf).sum(axis=(0, 1))
    null_term = (r.sum(axis=1)[:, None] * lf0).sum(axis=0)
    return (e_ld + fit_term) / temperature, (e_l1md + null_term) / temperature


def update_selection(state: VariationalState, data, d0: float, temperature: float) -> VariationalState:
    ln_eta1, ln_eta2 = selection_log_odds(state, data, d0, temperature)
    return state.replace(c=logistic(ln_eta1 - ln_eta2))


def update_mixture_weights(state: VariationalState, alpha0: float, temperature: float) -> VariationalState:
    alpha = (state.nk + alpha0 + (temperature - 1.0)) / temperature
    return state.replace(alpha=alpha)


def weighted_statistics(r, x):
    """Per-cluster counts, weighted means and weighted variances.

    Empty clusters get zero mean and variance.
    """
    nk = r.sum(axis=0)
    sx = (r[:, :, None] * x[:, None, :]).sum(axis=0)
    safe = np.where(nk > 0, nk, 1.0)[:, None]
    xbar = np.where(nk[:, None] > 0, sx / safe, 0.0)
    sq = (r[:, :, None] * (x[:, None, :] - xbar[None]) ** 2).sum(axis=0)
    s = np.where(nk[:, None] > 0, sq / safe, 0.0)
    return nk, sx, xbar, s


def update_component_params(
    state: VariationalState, data, beta0: float, a0: float, temperature: float
) -> VariationalState:
    x = _values(data)
    nk, sx, xbar, s = weighted_statistics(state.r, x)
    c = state.c[None, :]
    m0 = state.m0[None, :]
    b0 = state.b0[None, :]
    cn = c * nk[:, None]
    t = temperature
    beta = (cn + beta0) / t
    m = (c * sx + m0 * beta0) / (t * beta)
    a = (0.5 * cn + a0 + (t - 1.0)) / t
    b = b0 / t + (1.0 / (2.0 * t)) * (cn * s + (beta0 * cn / (beta0 + cn)) * (xbar - m0) ** 2)
    return state.replace(beta=beta, m=m, a=a, b=b)


def elbo_terms(state: VariationalState, data, hyper: Hyperparameters, temperature: float = 1.0) -> dict:
    """The nine expectations making up the ELBO, before temperature weighting.

    Keys starting with ``log_p`` are E_q[ln p(.)]; keys starting with
    ``log_q`` are E_q[ln q(.)] (negated and scaled by T in the bound).
    """
    x = _values(data)
    alpha0, beta0, a0, d0 = hyper.alpha0, hyper.beta0, hyper.a0, hyper.d0
    r, c = state.r, state.c
    k = state.k
    m0, b0 = state.m0[None, :], state.b0[None, :]
    a, b, beta, m = state.a, state.b, state.beta, state.m

    e_log_pi = expected_log_weight(state)
    e_log_tau = digamma(a) - np.log(b)
    e_tau = a / b
    elf = expected_log_density(state, x)
    lf0 = null_log_density(state, x)
    e_ld, e_l1md = expected_log_delta(c, d0, temperature)
    p1, p2, _ = _beta_factor(c, d0, temperature)

    log_p_x = float((r[:, :, None] * (elf * c)).sum() + (r.sum(axis=1)[:, None] * ((1.0 - c) * lf0)).sum())
    log_p_z = float((r * e_log_pi[None]).sum())
    log_p_pi = float(gammaln(k * alpha0) - k * gammaln(alpha0) + (alpha0 - 1.0) * e_log_pi.sum())
    log_p_phi = float(
        (
            0.5 * (math.log(beta0) - _LOG_2PI)
            + 0.5 * e_log_tau
            - 0.5 * beta0 * (e_tau * (m - m0) ** 2 + 1.0 / beta)
            + a0 * np.log(b0)
            - gammaln(a0)
            + (a0 - 1.0) * e_log_tau
            - b0 * e_tau
        ).sum()
    )
    log_p_gamma_delta = float(
        (
            c * e_ld
            + (1.0 - c) * e_l1md
            + gammaln(2.0 * d0)
            - 2.0 * gammaln(d0)
            + (d0 - 1.0) * (e_ld + e_l1md)
        ).sum()
    )

    log_q_z = float(_xlogx(r).sum())
    log_q_pi = float(gammaln(state.alpha.sum()) - gammaln(state.alpha).sum() + ((state.alpha - 1.0) * e_log_pi).sum())
    log_q_phi = float(
        (
            0.5 * (np.log(beta) - _LOG_2PI)
            + 0.5 * e_log_tau
            - 0.5
            + a * np.log(b)
            - gammaln(a)
            + (a - 1.0) * e_log_tau
            - a
        ).sum()
    )
    log_q_gamma_delta = float(
        (
            _xlogx(c)
            + _xlogx(1.0 - c)
            + gammaln(p1 + p2)
            - gammaln(p1)
            - gammaln(p2)
            + (p1 - 1.0) * e_ld
            + (p2 - 1.0) * e_l1md
        ).sum()
    )
    return {
        "log_p_x": log_p_x,
        "log_p_z": log_p_z,
        "log_p_pi": log_p_pi,
        "log_p_phi": log_p_phi,
        "log_p_gamma_delta": log_p_gamma_delta,
        "log_q_z": log_q_z,
        "log_q_pi": log_q_pi,
        "log_q_phi": log_q_phi,
        "log_q_gamma_delta": log_q_gamma_delta,
    }


def compute_elbo(state: VariationalState, data, hyper: Hyperparameters, temperature: float = 1.0) -> float:
    """Annealed ELBO: E[ln p] - T * E[ln q]."""
    terms = elbo_terms(state, data, hyper, temperature)
    bad = [name for name, value in terms.items() if not math.isfinite(value)]
    if bad:
        raise NonFiniteElbo(f"non-finite ELBO terms: {', '.join(bad)}")
    positive = sum(v for name, v in terms.items() if name.startswith("log_p"))
    negative = sum(v for name, v in terms.items() if name.startswith("log_q"))
    return positive - temperature * negative


def sweep(
    state: VariationalState,
    data,
    hyper: Hyperparameters,
    temperature: float,
    select: bool = True,
) -> VariationalState:
    """One E-step then M-step at ``temperature``; ``select=False`` keeps ``c``."""
    state = update_responsibilities(state, data, temperature)
    if select:
        state = update_selection(state, data, hyper.d0, temperature)
    state = update_mixture_weights(state, hyper.alpha0, temperature)
    return update_component_params(state, data, hyper.beta0, hyper.a0, temperature)


def extract_assignments(state_or_r) -> np.ndarray:
    """Hard labels by argmax responsibility; ties go to the smallest index."""
    r = state_or_r.r if isinstance(state_or_r, VariationalState) else np.asarray(state_or_r)
    return np.argmax(r, axis=1)


def extract_selection(state_or_c, threshold: float = 0.5) -> np.ndarray:
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    c = state_or_c.c if isinstance(state_or_c, VariationalState) else np.asarray(state_or_c)
    return c >= threshold


def certainty(state_or_r) -> float:
    """Mean over observations of the largest responsibility."""
    r = state_or_r.r if isinstance(state_or_r, VariationalState) else np.asarray(state_or_r)
    return float(r.max(axis=1).mean())


def _restart_seed(seed, index):
    return seed if index == 0 else [int(seed), int(index)]


def _run(x, data, hyper, schedule, seed, init):
    state = init_state(data, hyper, seed, schedule, concentration=init.concentration)
    # Components start at the prior, which is identical across k; an M-step from
    # the random responsibilities breaks that symmetry before the first E-step.
    t_start = schedule.temperature(0)
    state = update_mixture_weights(state, hyper.alpha0, t_start)
    state = update_component_params(state, x, hyper.beta0, hyper.a0, t_start)

    elbo_trace, temp_trace, warnings = [], [], []
    converged = False
    released = None
    for i in range(hyper.max_iterations):
        t = schedule.temperature(i)
        state = update_responsibilities(state, x, t)
        if released is None and (i >= init.max_hold or certainty(state) >= init.release_certainty):
            released = i
        if released is not None:
            state = update_selection(state, x, hyper.d0, t)
        state = update_mixture_weights(state, hyper.alpha0, t)
        state = update_component_params(state, x, hyper.beta0, hyper.a0, t)
        elbo = compute_elbo(state, x, hyper, t)
        elbo_trace.append(elbo)
        temp_trace.append(t)
        if i == 0 or temp_trace[i - 1] != t:
            continue
        improve = elbo - elbo_trace[i - 1]
        if t == 1.0 and improve < -1e-8 * max(1.0, abs(elbo_trace[i - 1])):
            msg = f"ELBO decreased by {-improve:.3g} at iteration {i} (T=1)"
            logger.warning(msg)
            warnings.append(msg)
        if released is None or i == released:
            continue
        if (t == 1.0 or schedule.kind is ScheduleKind.FIXED) and 0 < improve < hyper.epsilon:
            converged = True
            break
    return state, elbo_trace, temp_trace, converged, warnings


def fit(
    data,
    hyper: Hyperparameters,
    schedule: Optional[TemperatureSchedule] = None,
    seed: int = 0,
    selection_threshold: float = 0.5,
    init: Optional[InitOptions] = None,
) -> FitResult:
    """Run annealed CAVI until convergence or ``hyper.max_iterations``.

    Convergence needs ``0 < ELBO[i] - ELBO[i-1] < epsilon`` with the
    temperature unchanged between the two iterations and, unless the
    schedule is fixed, equal to 1.  While selection is held (see
    :class:`InitOptions`) the fit cannot converge.  With several starts,
    start 0 uses ``seed`` and start ``q`` the stream seeded by
    ``[seed, q]``; the start with the highest final ELBO wins, ties going
    to the earlier start.
    """
    if not isinstance(data, DataMatrix):
        data = DataMatrix(data)
    schedule = schedule or TemperatureSchedule.fixed(1.0)
    init = init or InitOptions()
    extract_selection(np.zeros(0), selection_threshold)
    if hyper.standardize:
        data = standardize(data)
    x = data.values

    best = None
    for q in range(init.n_init):
        run = _run(x, data, hyper, schedule, _restart_seed(seed, q), init)
        if best is None or run[1][-1] > best[1][-1]:
            best = run
    state, elbo_trace, temp_trace, converged, warnings = best

    labels = extract_assignments(state)
    sizes = np.bincount(labels, minlength=state.k)
    return FitResult(
        labels=labels,
        selected=extract_selection(state, selection_threshold),
        c=state.c.copy(),
        elbo_trace=elbo_trace,
        temperature_trace=temp_trace,
        iterations=len(elbo_trace),
        converged=converged,
        cluster_sizes=sizes,
        effective_k=int(np.count_nonzero(sizes)),
        final_state=state,
        warnings=warnings,
    )
