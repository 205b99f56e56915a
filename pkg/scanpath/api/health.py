from fastapi import APIRouter

from .. import __version__

router = APIRouter()

METRICS = ("multimatch", "nss", "congruency")


@router.get("/health")
async def health_check():
    """Health check endpoint for harness scripts."""
    return {
        "status": "healthy",
        "service": "scanpath",
        "version": __version__,
        "metrics": len(METRICS),
    }
