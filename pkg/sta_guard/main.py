"""
STA Guard - FastAPI service
HTTP entry point over the pulse synthesis, sensitivity, optimization and
propagation engine.
"""
import logging
import platform
from contextlib import asynccontextmanager
from datetime import datetime

import numpy as np
import scipy
import uvicorn
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

# Import local modules
from sta_guard.config import settings
from sta_guard.errors import STAGuardError, http_status
from sta_guard.models.schemas import APIResponse

# Import route modules
from sta_guard.routes.schemes import router as schemes_router
from sta_guard.routes.sensitivity import router as sensitivity_router
from sta_guard.routes.optimize import router as optimize_router
from sta_guard.routes.simulate import router as simulate_router
from sta_guard.routes.pulses import router as pulses_router

# Configure logging
logging.basicConfig(
    level=getattr(logging, settings.log_level.upper()),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Application lifespan events"""
    logger.info(f"Starting {settings.app_name} service...")
    yield
    logger.info(f"Shutting down {settings.app_name} service...")


# Create FastAPI app instance
app = FastAPI(
    title=settings.app_name,
    description="Robust shortcut-to-adiabaticity pulse design against unwanted transitions",
    version=settings.version,
    lifespan=lifespan,
    docs_url="/docs",
    redoc_url="/redoc"
)

# Configure CORS
app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.cors_origins,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.exception_handler(STAGuardError)
async def engine_exception_handler(request: Request, exc: STAGuardError):
    """Engine errors raised outside a route's own handling"""
    logger.error(f"Engine error: {str(exc)}")
    return JSONResponse(
        status_code=http_status(exc),
        content=APIResponse(success=False, message=str(exc)).model_dump(mode="json")
    )


# Global exception handler
@app.exception_handler(Exception)
async def global_exception_handler(request: Request, exc: Exception):
    """Global exception handler for all unhandled errors"""
    logger.error(f"Unhandled error: {str(exc)}", exc_info=True)
    return JSONResponse(
        status_code=500,
        content=APIResponse(
            success=False,
            message="An unexpected error occurred",
            data={"error": str(exc) if settings.debug else "Internal server error"}
        ).model_dump(mode="json")
    )


# API v1 routes
ROUTERS = {
    "schemes": schemes_router,
    "sensitivity": sensitivity_router,
    "optimize": optimize_router,
    "simulate": simulate_router,
    "pulses": pulses_router,
}
for name, router in ROUTERS.items():
    app.include_router(router, prefix=f"{settings.api_v1_prefix}/{name}", tags=[name])


# Health check endpoints

@app.get("/health")
async def health_check():
    """Main health check endpoint"""
    return APIResponse(
        success=True,
        message=f"{settings.app_name} service is healthy",
        data={
            "version": settings.version,
            "services": {name: "operational" for name in ROUTERS},
        }
    ).model_dump(mode="json")


@app.get("/health/detailed")
async def detailed_health_check():
    """Detailed health check with numerics configuration"""
    health_info = {
        "version": settings.version,
        "timestamp": datetime.utcnow().isoformat() + "Z",
        "system": {
            "python_version": platform.python_version(),
            "platform": platform.platform(),
            "numpy_version": np.__version__,
            "scipy_version": scipy.__version__,
        },
        "services": {name: "operational" for name in ROUTERS},
        "numerics": {
            "quad_abs_tol": settings.quad_abs_tol,
            "propagator_method": settings.propagator_method,
            "propagator_tol": settings.propagator_tol,
            "opt_starts": settings.opt_starts,
            "opt_max_evaluations": settings.opt_max_evaluations,
        },
    }
    return APIResponse(
        success=True,
        message="Detailed health information",
        data=health_info
    ).model_dump(mode="json")


@app.get("/")
async def root():
    """Root endpoint with API information"""
    return APIResponse(
        success=True,
        message=f"Welcome to {settings.app_name} v{settings.version}",
        data={
            "description": "Robust shortcut-to-adiabaticity pulse design against unwanted transitions",
            "version": settings.version,
            "documentation": {
                "swagger": "/docs",
                "redoc": "/redoc"
            },
            "endpoints": {name: f"{settings.api_v1_prefix}/{name}" for name in ROUTERS},
        }
    ).model_dump(mode="json")


if __name__ == "__main__":
    logger.info(f"Starting server on {settings.host}:{settings.port}")
    uvicorn.run(
        "sta_guard.main:app",
        host=settings.host,
        port=settings.port,
        reload=settings.debug,
        log_level=settings.log_level.lower()
    )
