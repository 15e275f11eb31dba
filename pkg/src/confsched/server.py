"""HTTP wire API around a single draft state.

GET /view, POST /mutate, GET /whatif, GET /recommend, GET /compare. All bodies
are JSON; a stale expected_revision answers 409 with the current revision.
"""
from __future__ import annotations

from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel, Field

from . import affinity as aff
from .corpus import UnknownIdError
from .gateway import DraftState, InfeasibleMutationError, Mutation, RevisionMismatchError


class MutationIn(BaseModel):
    kind: str
    payload: dict = Field(default_factory=dict)
    expected_revision: int


def create_app(state: DraftState) -> FastAPI:
    app = FastAPI(title="confsched gateway")

    @app.get("/view")
    def view():
        return state.snapshot()

    @app.post("/mutate")
    def mutate(mutation: MutationIn):
        try:
            return state.apply(Mutation(mutation.kind, mutation.payload, mutation.expected_revision))
        except RevisionMismatchError as exc:
            raise HTTPException(status_code=409, detail={"error": str(exc), "revision": state.revision})
        except (InfeasibleMutationError, UnknownIdError) as exc:
            raise HTTPException(status_code=400, detail={"error": str(exc)})

    @app.get("/whatif")
    def whatif(paper: str = Query(...), target: str = Query(...)):
        try:
            delta = state.whatif(paper, target)
        except UnknownIdError as exc:
            raise HTTPException(status_code=400, detail={"error": str(exc)})
        return {
            "d_conflicts": delta.d_conflicts,
            "d_coherence": delta.d_coherence,
            "new_violations": [list(v) for v in delta.new_violations],
            "feasible": delta.feasible,
        }

    @app.get("/recommend")
    def recommend_endpoint(person: str = Query(...), k: int = Query(10, ge=1)):
        recs = state.recommend_for(person, k)
        return {
            "person": person,
            "recommendations": [
                {"paper_id": r.paper_id, "score": r.score, "basis": r.basis} for r in recs
            ],
        }

    @app.get("/compare")
    def compare():
        cmp = state.compare()
        return {
            "records": aff.comparison_records(cmp, state.attendee_affinity, state.author_affinity)
        }

    return app
