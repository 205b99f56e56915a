from typing import List

from fastapi import APIRouter, Body
from pydantic import BaseModel, Field

from .. import config
from ..baselines import wta_scanpath
from ..core import SaliencyMap
from ..errors import NumericError
from ..models import WtaConfig
from .metrics import http_error

router = APIRouter()


class WtaRequest(BaseModel):
    saliency: List[List[float]] = Field(min_length=1)
    n_fixations: int = 8
    ior_radius: float = config.IOR_RADIUS


class ScanpathResponse(BaseModel):
    fixations: List[List[float]]  # [[x, y], ...] normalized


@router.post("/api/baselines/wta", response_model=ScanpathResponse)
def wta_endpoint(req: WtaRequest = Body(...)):
    try:
        cfg = WtaConfig(n_fixations=req.n_fixations, ior_radius=req.ior_radius)
        scanpath = wta_scanpath(SaliencyMap(req.saliency), cfg)
    except (ValueError, NumericError) as exc:
        raise http_error(exc) from exc
    return ScanpathResponse(fixations=scanpath.to_rows())
