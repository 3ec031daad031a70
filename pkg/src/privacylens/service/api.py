"""HTTP surface over the engine: ingestion, labels, QA, icons.

Every failure maps to exactly one typed error body
{"code", "message", "detail"} with a matching status: 400 bad_input,
404 not_found, 409 model_missing, 422 ambiguous_question, 500 internal.
"""

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from ..errors import AmbiguousQuestionError, NotTrainedError
from ..icons import STRATEGIES

__all__ = ["create_app", "ApiError"]


class ApiError(Exception):
    STATUS = {
        "bad_input": 400,
        "not_found": 404,
        "model_missing": 409,
        "ambiguous_question": 422,
        "internal": 500,
    }

    def __init__(self, code, message, detail=None):
        super().__init__(message)
        self.code = code
        self.message = message
        self.detail = detail

    def response(self):
        return JSONResponse(
            status_code=self.STATUS[self.code],
            content={"code": self.code, "message": self.message, "detail": self.detail},
        )


class IngestRequest(BaseModel):
    policy_id: str = Field(min_length=1)
    source: str = Field(min_length=1)
    url: str | None = None


class AskRequest(BaseModel):
    question: str = Field(min_length=1)


def create_app(engine):
    app = FastAPI(title="privacylens", docs_url=None, redoc_url=None)

    @app.exception_handler(ApiError)
    async def api_error_handler(request: Request, exc: ApiError):
        return exc.response()

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return ApiError("bad_input", "request body failed validation",
                        detail=str(exc.errors()[:3])).response()

    @app.exception_handler(Exception)
    async def fallback_handler(request: Request, exc: Exception):
        return ApiError("internal", "internal error", detail=type(exc).__name__).response()

    def entry_or_404(policy_id):
        try:
            return engine.entry(policy_id)
        except KeyError:
            raise ApiError("not_found", f"policy {policy_id!r} has not been ingested")

    @app.get("/health")
    def health():
        return {"status": "ok", "policies": len(engine.policy_ids())}

    @app.post("/policies")
    def ingest(req: IngestRequest):
        try:
            entry = engine.ingest(req.policy_id, req.source, url=req.url)
        except NotTrainedError as exc:
            raise ApiError("model_missing", str(exc))
        except ValueError as exc:
            raise ApiError("bad_input", str(exc))
        return {"policy_id": req.policy_id, "segment_count": len(entry.segments)}

    @app.get("/policies/{policy_id}/segments")
    def segments(policy_id: str):
        entry = entry_or_404(policy_id)
        return [
            {"segment_index": s.index, "text": s.text, "origin": s.origin}
            for s in entry.segments
        ]

    @app.get("/policies/{policy_id}/labels")
    def labels(policy_id: str):
        entry_or_404(policy_id)
        return engine.labels(policy_id)

    @app.post("/policies/{policy_id}/ask")
    def ask(policy_id: str, req: AskRequest):
        entry_or_404(policy_id)
        try:
            result = engine.ask(policy_id, req.question)
        except AmbiguousQuestionError as exc:
            raise ApiError("ambiguous_question", str(exc))
        except NotTrainedError as exc:
            raise ApiError("model_missing", str(exc))
        except ValueError as exc:
            raise ApiError("bad_input", str(exc))
        return {
            "question": req.question,
            "answers": [a.to_dict() for a in result.answers],
            "cer_q": result.cer_q,
            "frac_q": result.frac_q,
            "possibly_unanswerable": result.possibly_unanswerable,
            "notices": list(result.notices),
        }

    @app.get("/policies/{policy_id}/icons")
    def icons(policy_id: str, strategy: str = "conservative"):
        entry_or_404(policy_id)
        if strategy not in STRATEGIES:
            raise ApiError(
                "bad_input",
                f"unknown strategy {strategy!r}",
                detail=f"expected one of {list(STRATEGIES)}",
            )
        return [a.to_dict() for a in engine.icons(policy_id, strategy)]

    return app
