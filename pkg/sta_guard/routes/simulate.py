"""
Propagation API routes for STA Guard.
Simulates the perturbed 3- or 4-level system over a grid of coupling strengths.
"""
import logging

from fastapi import APIRouter, HTTPException

from sta_guard.engine.dynamics import HamiltonianSpec, beta_sweep, fit_transition_sensitivity
from sta_guard.engine.synthesis import resolve_pulse
from sta_guard.errors import STAGuardError, http_status
from sta_guard.models.schemas import APIResponse, BetaSweepRequest, PerturbedModel
from sta_guard.storage.files import frame_records

# Create router
router = APIRouter()

# Logger
logger = logging.getLogger(__name__)


@router.post("/beta-sweep", response_model=APIResponse)
async def simulate_beta_sweep(request: BetaSweepRequest):
    """Target-level population for each beta"""
    try:
        pulse = resolve_pulse(request.source)
        spec = HamiltonianSpec(pulse, PerturbedModel(delta=request.delta_t / pulse.T))
        frame = beta_sweep(spec, request.betas, method=request.method)
        data = {"columns": list(frame.columns), "rows": frame_records(frame)}
        if frame["beta"].abs().nunique() >= 2:
            data["fitted_sensitivity"] = fit_transition_sensitivity(frame["beta"], frame["P_target"])
        return APIResponse(
            success=True,
            message=f"Simulated {len(frame)} coupling strengths",
            data=data
        )
    except STAGuardError as e:
        logger.error(f"Simulation failed: {str(e)}")
        raise HTTPException(status_code=http_status(e), detail=str(e))
