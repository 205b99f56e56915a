import asyncio
import logging
import os

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from . import __version__
from .api.baselines import router as baselines_router
from .api.datasets import router as datasets_router
from .api.health import router as health_router
from .api.metrics import router as metrics_router
from .config import ALLOWED_ORIGINS

logger = logging.getLogger(__name__)

app = FastAPI(
    title="Scanpath API",
    description="Scanpath metrics and baseline generators",
    version=__version__,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=ALLOWED_ORIGINS,
    allow_credentials=True,
    allow_methods=["GET", "POST", "OPTIONS"],
    allow_headers=["*"],
)

app.include_router(health_router)
app.include_router(metrics_router)
app.include_router(baselines_router)
app.include_router(datasets_router)


def serve(host: str = "127.0.0.1", port: int = 8080) -> None:
    import hypercorn.asyncio
    import hypercorn.config

    config = hypercorn.config.Config()
    config.bind = [f"{host}:{port}"]
    config.application_path = "scanpath.server:app"

    logger.info("Starting server on %s:%d", host, port)
    asyncio.run(hypercorn.asyncio.serve(app, config))


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    serve(os.getenv("HOST", "127.0.0.1"), int(os.getenv("PORT", 8080)))
