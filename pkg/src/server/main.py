""" Main module for the FastAPI application. """

import logging
import os

from dotenv import load_dotenv
from fastapi import FastAPI
from slowapi.errors import RateLimitExceeded
from starlette.middleware.trustedhost import TrustedHostMiddleware

from config import LOG_FORMAT, LOG_LEVEL
from server.routers import detect
from server.server_config import DEFAULT_ALLOWED_HOSTS
from server.server_utils import limiter, rate_limit_exception_handler, ttad_exception_handler
from ttad import __version__
from ttad.errors import TTADError

# Load environment variables from .env file
load_dotenv()

logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT)

# Initialize the FastAPI application
app = FastAPI(title="ttad", version=__version__)
app.state.limiter = limiter

# Register the custom exception handlers
app.add_exception_handler(RateLimitExceeded, rate_limit_exception_handler)
app.add_exception_handler(TTADError, ttad_exception_handler)

# Fetch allowed hosts from the environment or use the default values
allowed_hosts = os.getenv("ALLOWED_HOSTS")
if allowed_hosts:
    allowed_hosts = allowed_hosts.split(",")
else:
    allowed_hosts = DEFAULT_ALLOWED_HOSTS

# Add middleware to enforce allowed hosts
app.add_middleware(TrustedHostMiddleware, allowed_hosts=allowed_hosts)


@app.get("/health")
async def health_check() -> dict[str, str]:
    """Liveness check; also reports the toolkit version serving the detectors."""
    return {"status": "healthy", "version": __version__}


# Include routers for modular endpoints
app.include_router(detect)
