"""
Transition sensitivity API routes for STA Guard.
"""
import logging

from fastapi import APIRouter, HTTPException

from sta_guard.engine.ancillary import scheme_from_descriptor
from sta_guard.engine.sensitivity import sensitivity, sensitivity_sweep
from sta_guard.errors import STAGuardError, http_status
from sta_guard.models.schemas import APIResponse, SensitivityRequest, SensitivitySweepRequest
from sta_guard.storage.files import frame_records

# Create router
router = APIRouter()

# Logger
logger = logging.getLogger(__name__)


@router.post("/evaluate", response_model=APIResponse)
async def evaluate_sensitivity(request: SensitivityRequest):
    """q or Q of a scheme at one Delta*T"""
    try:
        scheme = scheme_from_descriptor(request.scheme)
        report = sensitivity(scheme, request.delta_t / scheme.T)
        return APIResponse(
            success=True,
            message=f"{report.objective.value} at Delta T={request.delta_t:g}",
            data=report.model_dump()
        )
    except STAGuardError as e:
        logger.error(f"Error evaluating sensitivity: {str(e)}")
        raise HTTPException(status_code=http_status(e), detail=str(e))


@router.post("/sweep", response_model=APIResponse)
async def sweep_sensitivity(request: SensitivitySweepRequest):
    """q or Q over a list of Delta*T values"""
    try:
        scheme = scheme_from_descriptor(request.scheme)
        frame = sensitivity_sweep(scheme, request.delta_t)
        return APIResponse(
            success=True,
            message=f"{len(frame)} sweep points",
            data={"columns": list(frame.columns), "rows": frame_records(frame)}
        )
    except STAGuardError as e:
        logger.error(f"Error in sensitivity sweep: {str(e)}")
        raise HTTPException(status_code=http_status(e), detail=str(e))
