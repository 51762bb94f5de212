from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from butterfly.core.config import AppConfig
from butterfly.core.errors import DomainError, ResourceLimitError
from butterfly.core.models import VerifyReport
from butterfly.utils.linalg import theorem_formulas
from butterfly.utils.pipeline import verify_pipeline
from butterfly.utils.power import pd_lower_bound


class VerifyRequest(BaseModel):
    r: int
    fields: list[str] = Field(default_factory=list)


class FormulasResponse(BaseModel):
    r: int
    n: int
    mr: int
    z: int
    pd_lower_bound: int


def get_app(config: AppConfig | None = None) -> FastAPI:
    config = config or AppConfig()
    app = FastAPI(title="Butterfly HTTP API")

    @app.get("/health")
    def health() -> dict[str, str]:
        return {"status": "ok"}

    @app.get("/formulas/{r}", response_model=FormulasResponse)
    def formulas(r: int) -> FormulasResponse:
        try:
            mr, z = theorem_formulas(r)
        except DomainError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return FormulasResponse(r=r, n=(r + 1) * 2**r, mr=mr, z=z, pd_lower_bound=pd_lower_bound(r))

    @app.post("/verify", response_model=VerifyReport)
    def verify(payload: VerifyRequest) -> VerifyReport:
        try:
            return verify_pipeline(payload.r, fields=payload.fields or None, config=config)
        except DomainError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except ResourceLimitError as exc:
            raise HTTPException(status_code=413, detail=str(exc)) from exc

    return app


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(get_app(), host="0.0.0.0", port=AppConfig().http_port)
