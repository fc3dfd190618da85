""" Utility functions for the server. """

import logging

from fastapi import Request
from fastapi.responses import JSONResponse, Response
from slowapi import Limiter, _rate_limit_exceeded_handler
from slowapi.errors import RateLimitExceeded
from slowapi.util import get_remote_address

from server.server_config import MAX_COLS, MAX_ROWS
from ttad.errors import DataError, TTADError

logger = logging.getLogger(__name__)

# Initialize a rate limiter
limiter = Limiter(key_func=get_remote_address)


async def rate_limit_exception_handler(request: Request, exc: Exception) -> Response:
    """
    Custom exception handler for rate-limiting errors.

    Parameters
    ----------
    request : Request
        The incoming HTTP request.
    exc : Exception
        The exception raised, expected to be RateLimitExceeded.

    Returns
    -------
    Response
        A response indicating that the rate limit has been exceeded.

    Raises
    ------
    exc
        If the exception is not a RateLimitExceeded error, it is re-raised.
    """
    if isinstance(exc, RateLimitExceeded):
        # Delegate to the default rate limit handler
        return _rate_limit_exceeded_handler(request, exc)
    # Re-raise other exceptions
    raise exc


async def ttad_exception_handler(request: Request, exc: Exception) -> Response:
    """
    Map toolkit errors to a 422 JSON body naming the error class.

    Parameters
    ----------
    request : Request
        The incoming HTTP request.
    exc : Exception
        The exception raised, expected to be a TTADError.

    Returns
    -------
    Response
        ``{"error": <class name>, "detail": <message>}`` with status 422.
    """
    if not isinstance(exc, TTADError):
        raise exc
    logger.info("%s %s rejected: %s", request.method, request.url.path, exc)
    return JSONResponse(status_code=422, content={"error": type(exc).__name__, "detail": str(exc)})


def check_payload_size(*matrices) -> None:
    """
    Reject request matrices beyond ``MAX_ROWS`` x ``MAX_COLS``.

    Raises
    ------
    DataError
        If any matrix is too large.
    """
    for matrix in matrices:
        if matrix is None:
            continue
        rows = len(matrix)
        cols = max((len(row) for row in matrix), default=0)
        if rows > MAX_ROWS or cols > MAX_COLS:
            raise DataError(f"payload of {rows} x {cols} exceeds {MAX_ROWS} x {MAX_COLS}")
