"""
Sensitivity optimization API routes for STA Guard.
Runs the multi-start simplex search over a scheme family.
"""
import logging

from fastapi import APIRouter, HTTPException

from sta_guard.config import settings
from sta_guard.engine.optimize import FAMILIES, minimize_sensitivity
from sta_guard.errors import STAGuardError, http_status
from sta_guard.models.schemas import APIResponse, OptProblem

# Create router
router = APIRouter()

# Logger
logger = logging.getLogger(__name__)


@router.get("/families", response_model=APIResponse)
async def list_families():
    """Optimizable families with default bounds"""
    return APIResponse(
        success=True,
        message="Optimizable scheme families",
        data={
            "families": {
                kind.value: {
                    "objective": family.objective.value,
                    "bounds": family.default_bounds(),
                } for kind, family in FAMILIES.items()
            },
            "defaults": {
                "starts": settings.opt_starts,
                "max_evaluations": settings.opt_max_evaluations,
                "seed": settings.opt_seed,
            }
        }
    )


@router.post("/run", response_model=APIResponse)
async def run_optimization(problem: OptProblem):
    """Minimize q or Q for one family at fixed Delta*T"""
    try:
        result = minimize_sensitivity(problem)
        return APIResponse(
            success=True,
            message=f"Best {problem.family.value} value {result.best_value:.3e}",
            data=result.model_dump(mode="json")
        )
    except STAGuardError as e:
        logger.error(f"Optimization failed: {str(e)}")
        raise HTTPException(status_code=http_status(e), detail=str(e))
