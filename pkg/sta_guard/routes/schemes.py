"""
Scheme catalog API routes for STA Guard.
Lists the ancillary-function families and describes individual schemes.
"""
import logging

from fastapi import APIRouter, HTTPException

from sta_guard.engine.ancillary import boundary_profile, scheme_from_descriptor
from sta_guard.engine.optimize import scheme_catalog
from sta_guard.engine.synthesis import pulse_metrics, synthesize
from sta_guard.errors import STAGuardError, http_status
from sta_guard.models.schemas import APIResponse, SchemeDescriptor

# Create router
router = APIRouter()

# Logger
logger = logging.getLogger(__name__)


@router.get("/catalog", response_model=APIResponse)
async def get_catalog():
    """All catalog scheme families"""
    entries = scheme_catalog()
    return APIResponse(
        success=True,
        message=f"{len(entries)} scheme families",
        data={"schemes": entries}
    )


@router.post("/describe", response_model=APIResponse)
async def describe_scheme(descriptor: SchemeDescriptor):
    """Boundary profile and pulse metrics of one scheme"""
    try:
        scheme = scheme_from_descriptor(descriptor)
        metrics = pulse_metrics(synthesize(scheme))
        return APIResponse(
            success=True,
            message=f"Described {scheme!r}",
            data={
                "scheme": scheme.descriptor().model_dump(mode="json"),
                "target": scheme.target.value,
                "boundary": boundary_profile(scheme).model_dump(),
                "metrics": metrics.model_dump(),
            }
        )
    except STAGuardError as e:
        logger.error(f"Error describing scheme: {str(e)}")
        raise HTTPException(status_code=http_status(e), detail=str(e))
