"""
Pulse sampling API routes for STA Guard.
"""
import logging

from fastapi import APIRouter, HTTPException

from sta_guard.engine.synthesis import pulse_metrics, resolve_pulse
from sta_guard.errors import STAGuardError, http_status
from sta_guard.models.schemas import APIResponse, PulseSampleRequest
from sta_guard.storage.files import frame_records

# Create router
router = APIRouter()

# Logger
logger = logging.getLogger(__name__)


@router.post("/sample", response_model=APIResponse)
async def sample_pulse(request: PulseSampleRequest):
    """Uniform samples of the physical controls plus area and energy"""
    try:
        pulse = resolve_pulse(request.source)
        frame = pulse.sample(request.samples)
        return APIResponse(
            success=True,
            message=f"Sampled {pulse.label}",
            data={
                "label": pulse.label,
                "metrics": pulse_metrics(pulse).model_dump(),
                "columns": list(frame.columns),
                "rows": frame_records(frame),
            }
        )
    except STAGuardError as e:
        logger.error(f"Pulse sampling failed: {str(e)}")
        raise HTTPException(status_code=http_status(e), detail=str(e))
