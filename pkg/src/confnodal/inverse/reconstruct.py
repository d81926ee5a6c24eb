"""Reconstruction of p and q from nodal data."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import TYPE_CHECKING

from confnodal.calculus import t_grid, t_to_x
from confnodal.inverse.limits import index_ladder, recover_f, recover_g, recover_Q, select_node_sequence
from confnodal.inverse.steps import step2_p, step3_r, step4_mean_q, step5_q
from confnodal.model import PotentialPair
from confnodal.shared.errors import DegenerateDenominatorError
from confnodal.shared.types import NodalInput, ReconstructionResult, StepStatus

if TYPE_CHECKING:
    from confnodal.config import RunConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReconstructOptions:
    richardson: bool = True
    richardson_levels: int = 3
    smoothing: str = "moving_average"
    smoothing_window: int = 5
    step4_threshold: float = 0.1
    step4_endpoint_term: bool = False
    second_pass: bool = True
    size: int | None = None

    @classmethod
    def from_config(cls, cfg: RunConfig) -> ReconstructOptions:
        return cls(
            richardson=cfg.richardson,
            richardson_levels=cfg.richardson_levels,
            smoothing=cfg.smoothing,
            smoothing_window=cfg.smoothing_window,
            step4_threshold=cfg.step4_threshold,
            step4_endpoint_term=cfg.step4_endpoint_term,
            second_pass=cfg.second_pass,
            size=cfg.resolved_grid(),
        )


def required_indices(n_use: int, top: int, options: ReconstructOptions) -> list[int]:
    """Every index whose nodes the reconstruction reads."""
    return index_ladder(n_use, top, options.richardson, options.richardson_levels)


def reconstruct(input: NodalInput, options: ReconstructOptions | None = None) -> ReconstructionResult:
    """Run Steps 1 to 5.

    Q uses every rung of the index ladder. With Richardson extrapolation f uses
    the rungs above n_use; without it, f is the finite-n value at n_use. g is
    evaluated at n_use with its oscillatory terms built from the recovered p
    and q; a second pass repeats Steps 4 and 5 with the recovered mean of q.

    Step 1 does not feed the limits. They sample every node of each rung and
    interpolate to the grid, which covers the sequence x_n^{j_n} for every x
    at once. select_node_sequence runs on the grid only to count the points
    whose j_n is clamped to the first or last node (`edge_bias_count`).

    A degenerate Step 4 raises DegenerateDenominatorError carrying the partial
    result.
    """
    opts = options or ReconstructOptions()
    alpha = input.alpha
    ladder = required_indices(input.n_use, input.top, opts)
    result = ReconstructionResult(alpha=float(alpha))
    diag = result.diagnostics
    diag["ladder"] = ladder
    diag["options"] = asdict(opts)

    selection = select_node_sequence(input, t_to_x(t_grid(alpha, opts.size), alpha), input.n_use)
    diag["edge_bias_count"] = selection.edge_bias_count
    result.status["step1"] = StepStatus.OK

    Q = recover_Q(input, ladder, opts.size)
    f_ladder = ladder[1:] if opts.richardson else [input.n_use]
    f = recover_f(input, Q, f_ladder, opts.size)
    result.Q, result.f = Q, f
    diag["Q_end"] = float(Q.values[-1])

    p, diag["step2"] = step2_p(Q, opts.smoothing, opts.smoothing_window)
    result.p = p
    result.status["step2"] = StepStatus.OK

    r, diag["step3"] = step3_r(f, p, opts.smoothing, opts.smoothing_window)
    result.r = r
    result.status["step3"] = StepStatus.OK

    def mean_pass(mean_guess: float):
        pair = PotentialPair(p=p, q=r + mean_guess, alpha=alpha)
        g = recover_g(input, Q, f, pair, input.n_use, opts.size)
        result.g = g
        return step4_mean_q(g, r, p, Q, opts.step4_threshold, opts.step4_endpoint_term)

    try:
        report = mean_pass(0.0)
        if opts.second_pass:
            first = report.mean_q
            report = mean_pass(first)
            diag["second_pass_change"] = report.mean_q - first
            logger.info("Second pass moved the mean of q by %.3e", report.mean_q - first)
    except DegenerateDenominatorError as e:
        result.status["step4"] = StepStatus.DEGENERATE
        result.status["step5"] = StepStatus.SKIPPED
        diag["step4"] = {"error": str(e)}
        logger.warning("Step 4 degenerate: %s", e)
        raise DegenerateDenominatorError(str(e), partial=result) from e

    diag["step4"] = asdict(report)
    result.status["step4"] = StepStatus.OK
    result.mean_q = report.mean_q
    result.q = step5_q(r, report.mean_q)
    result.status["step5"] = StepStatus.OK
    diag["mean_free_residual"] = (result.q - report.mean_q).mean()
    return result
