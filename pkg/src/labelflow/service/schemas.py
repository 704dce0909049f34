"""Pydantic request/response models for the HTTP API."""
from __future__ import annotations

from pydantic import BaseModel, Field


class LabelEntry(BaseModel):
    uuid: str
    category: str
    free_text: str | None = Field(default=None, alias="freeText")

    model_config = {"populate_by_name": True}

    def to_wire(self) -> dict:
        out = {"uuid": self.uuid, "category": self.category}
        if self.free_text is not None:
            out["freeText"] = self.free_text
        return out


class ResponseOutputs(BaseModel):
    labels: list[LabelEntry] | None = None
    categories: list[str] | None = None
    samples: list[str] | None = None


class ResponseBody(BaseModel):
    request_id: str = Field(alias="requestId")
    outputs: ResponseOutputs

    model_config = {"populate_by_name": True}


class ResponseAck(BaseModel):
    accepted: bool
    request_id: str = Field(serialization_alias="requestId")


class SessionSummary(BaseModel):
    id: str
    status: str
    cursor: str | None
    workflow_valid: bool = Field(serialization_alias="workflowValid")
    progress: dict
    diagnostics: list[dict]


class SessionList(BaseModel):
    sessions: list[SessionSummary]


class RequestList(BaseModel):
    pending: list[dict]
    panels: list[dict]


class TraceBody(BaseModel):
    entries: list[dict]
