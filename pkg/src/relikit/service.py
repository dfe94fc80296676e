"""HTTP API over the campaign store.

Endpoints
---------
POST /campaigns                     create a campaign
GET  /campaigns/{id}                full read-only view
POST /campaigns/{id}/propose        refresh posterior + next stress level
POST /campaigns/{id}/results        record an outcome; requires the
                                    X-Expected-Version header and returns
                                    409 with the current version when the
                                    caller's view is stale
"""

from __future__ import annotations

import os

from fastapi import FastAPI, Header, HTTPException
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .altsbd import AltPriors, MaterialTestConfig, UseProfile
from .campaign_store import CampaignStore, VersionConflict


class CreateCampaignRequest(BaseModel):
    id: str = Field(pattern=r"^[A-Za-z0-9_-]{1,64}$")
    seed: int = 0
    sigma_ult: float = 1339.67
    config: dict = None
    priors: dict = None


class ProposeRequest(BaseModel):
    n_draws: int = Field(500, ge=10, le=20000)
    n_eval: int = Field(100, ge=5, le=20000)
    p: float = Field(0.05, gt=0.0, lt=1.0)
    use_level: float = Field(0.1, gt=0.0, lt=1.0)


class ResultRequest(BaseModel):
    q: float = Field(gt=0.0, lt=1.0)
    cycles: float = Field(gt=0.0)
    censored: bool = False


def create_app(data_dir: str = None) -> FastAPI:
    data_dir = data_dir or os.environ.get(
        "RELIKIT_DATA", os.path.expanduser("~/.relikit"))
    store = CampaignStore(data_dir)
    app = FastAPI(title="relikit campaign service")

    def _load(campaign_id: str):
        try:
            return store.load(campaign_id)
        except (KeyError, ValueError):
            raise HTTPException(404, f"no campaign {campaign_id!r}")

    @app.post("/campaigns", status_code=201)
    def create_campaign(req: CreateCampaignRequest):
        cfg = MaterialTestConfig(**req.config) if req.config else \
            MaterialTestConfig(req.sigma_ult)
        priors = AltPriors(**req.priors) if req.priors else AltPriors()
        try:
            camp = store.create(req.id, cfg, priors, req.seed)
        except ValueError as e:
            raise HTTPException(409, str(e))
        return {"id": camp.id, "version": camp.version}

    @app.get("/campaigns/{campaign_id}")
    def get_campaign(campaign_id: str):
        return _load(campaign_id).to_view()

    @app.post("/campaigns/{campaign_id}/propose")
    def propose(campaign_id: str, req: ProposeRequest = None):
        _load(campaign_id)
        req = req or ProposeRequest()
        return store.propose(campaign_id,
                             UseProfile((req.use_level,), (1.0,)),
                             req.p, req.n_draws, req.n_eval)

    @app.post("/campaigns/{campaign_id}/results")
    def record(campaign_id: str, req: ResultRequest,
               x_expected_version: int = Header(default=None)):
        _load(campaign_id)
        if x_expected_version is None:
            raise HTTPException(
                428, "X-Expected-Version header is required")
        try:
            v = store.record(campaign_id, req.q, req.cycles, req.censored,
                             x_expected_version)
        except VersionConflict as e:
            return JSONResponse(
                status_code=409,
                content={"error": "version conflict",
                         "expected": e.expected,
                         "current_version": e.current})
        except ValueError as e:
            raise HTTPException(422, str(e))
        return {"version": v}

    return app
