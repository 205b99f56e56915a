"""
Metrics API: MultiMatch, NSS and congruency on JSON payloads.
"""

import logging
from typing import List, Optional

from fastapi import APIRouter, Body, HTTPException
from pydantic import BaseModel, Field

from ..core import SaliencyMap
from ..errors import NumericError
from ..metrics import congruency_with_threshold, multimatch, scanpath_nss
from ..models import MultiMatchResult, Scanpath

logger = logging.getLogger(__name__)

router = APIRouter()

Rows = List[List[Optional[float]]]


class MultiMatchRequest(BaseModel):
    a: Rows = Field(min_length=1)  # [[x, y, t?, dur?], ...] normalized
    b: Rows = Field(min_length=1)


class SaliencyRequest(BaseModel):
    saliency: List[List[float]] = Field(min_length=1)  # rows of the map
    scanpath: Rows = Field(min_length=1)


class NssResponse(BaseModel):
    nss: float


class CongruencyResponse(BaseModel):
    congruency: float
    threshold: float


def http_error(exc: Exception) -> HTTPException:
    """400 for bad input, 422 for numeric failures."""
    status = 422 if isinstance(exc, NumericError) else 400
    detail = getattr(exc, "detail", None) or str(exc)
    return HTTPException(status_code=status, detail=detail)


@router.post("/api/metrics/multimatch", response_model=MultiMatchResult)
def multimatch_endpoint(req: MultiMatchRequest = Body(...)):
    try:
        return multimatch(Scanpath.from_points(req.a), Scanpath.from_points(req.b))
    except (ValueError, NumericError) as exc:
        raise http_error(exc) from exc


@router.post("/api/metrics/nss", response_model=NssResponse)
def nss_endpoint(req: SaliencyRequest = Body(...)):
    try:
        value = scanpath_nss(SaliencyMap(req.saliency), Scanpath.from_points(req.scanpath))
    except (ValueError, NumericError) as exc:
        raise http_error(exc) from exc
    return NssResponse(nss=value)


@router.post("/api/metrics/congruency", response_model=CongruencyResponse)
def congruency_endpoint(req: SaliencyRequest = Body(...)):
    try:
        value, threshold = congruency_with_threshold(
            SaliencyMap(req.saliency), Scanpath.from_points(req.scanpath)
        )
    except (ValueError, NumericError) as exc:
        raise http_error(exc) from exc
    return CongruencyResponse(congruency=value, threshold=threshold)
