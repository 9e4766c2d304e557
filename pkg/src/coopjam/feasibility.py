"""Can jamming make the secrecy rate strictly positive?

For each eavesdropper, demanding a higher destination SINR than
eavesdropper SINR is linear in the jammer powers once cross-multiplied:

    sum_k p_k * (h_d * g_e[j,k] - h_e[j] * g_d[k])  >  h_e[j]*sigma2_d - h_d*sigma2_e[j]

A witness allocation inside the power box certifies feasibility.  Strict
inequalities are approximated by a small margin added to the right-hand
side, since LP solvers only handle closed constraints.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .model import ChannelGains, PowerAllocation, Scenario, _check_dims
from .numerics import LinearProgram, lp_solve


@dataclass(frozen=True)
class FeasibilityVerdict:
    feasible: bool
    witness: PowerAllocation | None
    margin: float
    """Worst-case slack of the strict inequalities at the witness (when
    feasible) or the best achievable slack (when not, <= 0)."""


def default_strict_margin(scenario: Scenario, gains: ChannelGains) -> float:
    rhs = (gains.h_e * scenario.sigma2_dest
           - gains.h_d * scenario.sigma2_eaves)
    return 1e-9 * max(1.0, float(np.max(np.abs(rhs))))


def build_feasibility_lp(scenario: Scenario, gains: ChannelGains,
                         strict_margin: float) -> LinearProgram:
    """Minimum-total-power LP whose feasibility decides positive secrecy."""
    _check_dims(scenario, gains)
    n = scenario.n_jammers
    rows = []
    for j in range(scenario.n_eavesdroppers):
        a = gains.h_d * gains.g_e[j] - gains.h_e[j] * gains.g_d
        b = (gains.h_e[j] * scenario.sigma2_dest
             - gains.h_d * scenario.sigma2_eaves[j])
        rows.append((a, ">=", b + strict_margin))
    return LinearProgram(c=np.ones(n), rows=tuple(rows),
                         lower=np.zeros(n), upper=scenario.p_max)


def check_positive_secrecy(scenario: Scenario, gains: ChannelGains,
                           strict_margin: float | None = None) -> FeasibilityVerdict:
    """Decide whether some in-box allocation yields secrecy rate > 0.

    The reported margin is exact slack against the un-margined
    inequalities; a margin of ~0 means the instance sits on the
    feasibility boundary and the verdict is margin-sensitive.
    """
    if strict_margin is None:
        strict_margin = default_strict_margin(scenario, gains)
    lp = build_feasibility_lp(scenario, gains, strict_margin)
    res = lp_solve(lp)
    if res.status == "optimal":
        slack = [float(a @ res.x - (b - strict_margin))
                 for a, _, b in lp.rows]
        p = PowerAllocation(np.clip(res.x, 0.0, scenario.p_max))
        return FeasibilityVerdict(feasible=True, witness=p,
                                  margin=min(slack))
    if res.status != "infeasible":
        raise NumericalError(
            f"feasibility LP ended with status {res.status}")
    # Infeasible: report how far away feasibility is by maximising the
    # minimum slack z (z <= a@p - b for all rows).
    n = scenario.n_jammers
    rows = []
    for a, _, b in lp.rows:
        row = np.append(a, -1.0)
        rows.append((row, ">=", b - strict_margin))
    aux = LinearProgram(
        c=np.append(np.zeros(n), -1.0),
        rows=tuple(rows),
        lower=np.append(np.zeros(n), -np.inf),
        upper=np.append(scenario.p_max, np.inf))
    aux_res = lp_solve(aux)
    margin = float(aux_res.x[-1]) if aux_res.status == "optimal" else -np.inf
    return FeasibilityVerdict(feasible=False, witness=None, margin=margin)
