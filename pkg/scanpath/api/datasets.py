"""
Dataset API: length statistics for a canonical-format file on the server.

Relative paths resolve against ``SCANPATH_DATA_DIR``.
"""

import logging
from typing import Dict

from fastapi import APIRouter, Body
from pydantic import BaseModel, Field

from .. import config
from ..errors import ScanpathError
from ..ingest import length_stats_by_split, load_dataset, resolve_asset
from ..models import CoordinateMode, StatsSummary
from .metrics import http_error

logger = logging.getLogger(__name__)

router = APIRouter()


class StatsRequest(BaseModel):
    path: str = Field(min_length=1)
    coordinates: CoordinateMode = CoordinateMode.NORMALIZED


@router.post("/api/datasets/stats", response_model=Dict[str, StatsSummary])
def dataset_stats_endpoint(req: StatsRequest = Body(...)):
    path = resolve_asset(req.path, config.DATA_DIR or None)
    logger.info("Stats request for %s", path)
    try:
        return length_stats_by_split(load_dataset(path, req.coordinates))
    except ScanpathError as exc:
        raise http_error(exc) from exc
