"""HTTP API for the relevance review, serving the browser UI statically.

JSON endpoints under /api expose the plan, entry packets (issue context
plus origin code and accepted fix), label submission, agreement stats, and
the relevance-filtered export. Annotator identity travels in the
X-Annotator header; this is a local research tool, not an authenticated
multi-tenant service.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Header, HTTPException, Query
from fastapi.responses import FileResponse, JSONResponse
from pydantic import BaseModel

from .store import (
    AnnotationRecord,
    ExportBlocked,
    NotAssignedError,
    ReviewStore,
    UnknownEntryError,
)

DEFAULT_PORT = 8787


class LabelBody(BaseModel):
    relevant: bool
    note: str = ""
    request_id: str = ""


class ExportBody(BaseModel):
    path: str = "entries_reviewed.jsonl"
    allow_partial: bool = False


def _entry_packet(store: ReviewStore, entry_id: str, annotator: str | None):
    entry = store.entries[entry_id]
    issue = store.issues_by_key.get(entry.issue_key)
    labels = {
        annot: {"relevant": rec.relevant, "note": rec.note, "timestamp": rec.timestamp}
        for annot, rec in store.labels_for(entry_id).items()
    }
    packet = {
        "id": entry.id,
        "issue_title": entry.issue_title,
        "issue_url": entry.issue_url,
        "issue_description": issue.description if issue else "",
        "issue_comments": [list(c) for c in issue.comments] if issue else [],
        "origin_code": entry.rejected,
        "accepted_fix": entry.chosen,
        "log_before": entry.log_before,
        "log_after": entry.log_after,
        "labels": labels,
        "final_relevance": store.final_relevance(entry_id),
    }
    if annotator:
        packet["my_label"] = labels.get(annotator)
    return packet


def create_app(store: ReviewStore, static_dir=None):
    app = FastAPI(title="log-review")

    @app.get("/api/plan")
    def get_plan():
        return store.plan.to_dict()

    @app.get("/api/entries")
    def list_entries(
        annotator: str = Query(...),
        cursor: int = Query(0, ge=0),
        limit: int = Query(20, ge=1, le=200),
        unlabeled_only: bool = Query(False),
    ):
        assigned = store.assigned_to(annotator)
        if not assigned:
            raise HTTPException(status_code=403, detail=f"no plan for {annotator}")
        ids = list(assigned)
        if unlabeled_only:
            ids = [i for i in ids if (i, annotator) not in store.current]
            window = ids[:limit]
            next_cursor = None
        else:
            window = ids[cursor : cursor + limit]
            next_cursor = cursor + limit if cursor + limit < len(ids) else None
        labeled = sum(1 for i in assigned if (i, annotator) in store.current)
        return {
            "entries": [_entry_packet(store, i, annotator) for i in window],
            "next_cursor": next_cursor,
            "assigned": len(assigned),
            "labeled": labeled,
        }

    @app.get("/api/entries/{entry_id}")
    def get_entry(entry_id: str, x_annotator: str | None = Header(default=None)):
        if entry_id not in store.entries:
            raise HTTPException(status_code=404, detail=f"unknown entry {entry_id}")
        return _entry_packet(store, entry_id, x_annotator)

    @app.put("/api/entries/{entry_id}/label")
    def put_label(
        entry_id: str,
        body: LabelBody,
        x_annotator: str = Header(...),
    ):
        record = AnnotationRecord(
            entry_id=entry_id,
            annotator=x_annotator,
            relevant=body.relevant,
            note=body.note,
            request_id=body.request_id,
        )
        try:
            stored = store.record_label(record)
        except UnknownEntryError:
            raise HTTPException(status_code=404, detail=f"unknown entry {entry_id}")
        except NotAssignedError as exc:
            raise HTTPException(status_code=403, detail=str(exc))
        return {"ok": True, "label": stored.to_dict()}

    @app.get("/api/stats/kappa")
    def get_kappa():
        return store.agreement_stats()

    @app.get("/api/adjudication")
    def adjudication_queue():
        """Overlap entries whose annotators currently disagree."""
        queue = []
        for entry_id in store.plan.overlap_ids:
            if store.final_relevance(entry_id) == "Disagreement":
                queue.append(entry_id)
        return {"entries": queue, "adjudicator": store.adjudicator}

    @app.post("/api/export")
    def post_export(body: ExportBody):
        try:
            summary = store.export_reviewed(body.path, allow_partial=body.allow_partial)
        except ExportBlocked as exc:
            return JSONResponse(
                status_code=409,
                content={"error": str(exc), "blocking_ids": exc.blocking_ids},
            )
        return summary

    if static_dir:
        static_root = Path(static_dir)

        @app.get("/")
        def index():
            index_file = static_root / "index.html"
            if not index_file.is_file():
                raise HTTPException(status_code=404, detail="UI bundle not built")
            return FileResponse(index_file)

        @app.get("/{asset_path:path}")
        def asset(asset_path: str):
            target = (static_root / asset_path).resolve()
            if not str(target).startswith(str(static_root.resolve())):
                raise HTTPException(status_code=404, detail="not found")
            if not target.is_file():
                raise HTTPException(status_code=404, detail="not found")
            return FileResponse(target)

    return app


def serve(store, host="127.0.0.1", port=DEFAULT_PORT, static_dir=None):
    import uvicorn

    app = create_app(store, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
