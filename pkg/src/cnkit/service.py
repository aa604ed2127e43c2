"""HTTP service for the annotation workflow.

Annotator-facing payloads are blinded: no model or decoding identifier is
ever serialized. Authentication is a static per-annotator token, passed in
the X-Annotator-Token header.
"""

from fastapi import FastAPI, Header, HTTPException
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .humaneval import (AnnotationError, AnnotationRecord, AnnotationStore,
                        BestConflictError, VerdictRecord, now)

TOKEN_HEADER = "X-Annotator-Token"


class AnnotationBody(BaseModel):
    cn_id: str
    sui: int = Field(ge=1, le=5)
    spe: int = Field(ge=1, le=5)
    grm: int = Field(ge=1, le=5)
    cho: int = Field(ge=0, le=1)
    best: int = Field(ge=0, le=1)


class VerdictBody(BaseModel):
    verdict: str


def create_app(store: AnnotationStore, items, tokens, comparisons=()):
    """Build the service app.

    ``tokens`` maps token string -> annotator id; ``items`` is the
    evaluation batch, ``comparisons`` the APE pairs.
    """
    app = FastAPI(title="cn annotation service")
    items_by_id = {item.hs_id: item for item in items}
    comparisons_by_id = {c.comparison_id: c for c in comparisons}

    def annotator_for(token):
        if token is None or token not in tokens:
            raise HTTPException(status_code=401, detail="unknown annotator token")
        return tokens[token]

    @app.get("/items")
    def list_items(x_annotator_token: str | None = Header(default=None)):
        annotator = annotator_for(x_annotator_token)
        done = {cn for (a, cn) in store.current_annotations() if a == annotator}
        queue = []
        for item in items:
            item_done = all(cid in done for cid, _ in item.candidates)
            queue.append({"hs_id": item.hs_id, "done": item_done})
        return {"annotator": annotator, "items": queue}

    @app.get("/items/{hs_id}")
    def get_item(hs_id: str,
                 x_annotator_token: str | None = Header(default=None)):
        annotator_for(x_annotator_token)
        item = items_by_id.get(hs_id)
        if item is None:
            raise HTTPException(status_code=404, detail="no such item")
        return item.annotator_payload()

    @app.post("/items/{hs_id}/annotation")
    def post_annotation(hs_id: str, body: AnnotationBody,
                        x_annotator_token: str | None = Header(default=None)):
        annotator = annotator_for(x_annotator_token)
        item = items_by_id.get(hs_id)
        if item is None:
            raise HTTPException(status_code=404, detail="no such item")
        if body.cn_id not in {cid for cid, _ in item.candidates}:
            raise HTTPException(status_code=422,
                                detail=f"cn {body.cn_id} not in item {hs_id}")
        try:
            record = AnnotationRecord(
                annotator_id=annotator, hs_id=hs_id, cn_id=body.cn_id,
                sui=body.sui, spe=body.spe, grm=body.grm, cho=body.cho,
                best=body.best, timestamp=now())
            return store.submit_annotation(record)
        except BestConflictError as exc:
            return JSONResponse(status_code=409, content={
                "error": "is-best-conflict",
                "conflicting_cn_id": exc.conflicting_cn_id})
        except AnnotationError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.get("/comparisons")
    def list_comparisons(x_annotator_token: str | None = Header(default=None)):
        annotator = annotator_for(x_annotator_token)
        done = {c for (a, c) in store.current_verdicts() if a == annotator}
        return {"comparisons": [
            {"comparison_id": c.comparison_id, "done": c.comparison_id in done}
            for c in comparisons]}

    @app.get("/comparisons/{comparison_id}")
    def get_comparison(comparison_id: str,
                       x_annotator_token: str | None = Header(default=None)):
        annotator_for(x_annotator_token)
        comparison = comparisons_by_id.get(comparison_id)
        if comparison is None:
            raise HTTPException(status_code=404, detail="no such comparison")
        return comparison.annotator_payload()

    @app.post("/comparisons/{comparison_id}/verdict")
    def post_verdict(comparison_id: str, body: VerdictBody,
                     x_annotator_token: str | None = Header(default=None)):
        annotator = annotator_for(x_annotator_token)
        if comparison_id not in comparisons_by_id:
            raise HTTPException(status_code=404, detail="no such comparison")
        try:
            record = VerdictRecord(annotator_id=annotator,
                                   comparison_id=comparison_id,
                                   verdict=body.verdict, timestamp=now())
        except AnnotationError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return store.submit_verdict(record)

    @app.get("/progress")
    def progress(x_annotator_token: str | None = Header(default=None)):
        annotator = annotator_for(x_annotator_token)
        done_items = 0
        done_cn = {cn for (a, cn) in store.current_annotations()
                   if a == annotator}
        for item in items:
            if all(cid in done_cn for cid, _ in item.candidates):
                done_items += 1
        done_cmp = sum(1 for (a, _) in store.current_verdicts()
                       if a == annotator)
        return {"annotator": annotator,
                "items_done": done_items, "items_total": len(items),
                "comparisons_done": done_cmp,
                "comparisons_total": len(comparisons)}

    return app
