""" This module contains the routers for the FastAPI application. """

from server.routers.detect import router as detect

__all__ = ["detect"]
