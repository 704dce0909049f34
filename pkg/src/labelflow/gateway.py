"""The human-computation boundary.

Interface-module executions become ``InteractionRequest``s queued on a
gateway; annotator clients (the browser UI, or scripted oracles in
tests) answer them with ``InteractionResponse``s. The engine blocks on
``await_response`` for blocking nodes and polls at node boundaries for
non-blocking ones. Each request is answered at most once; responses are
validated against the request payload before the engine ever sees them.
"""
from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from typing import Any, Callable


class GatewayError(RuntimeError):
    pass


class DuplicateRequestId(GatewayError):
    pass


class UnknownRequest(GatewayError):
    pass


class AlreadyAnswered(GatewayError):
    """A second (or late) response arrived for an answered request."""


class ValidationFailure(GatewayError):
    """The response violates its request's payload contract."""


class Timeout(GatewayError):
    pass


class GatewayClosed(GatewayError):
    pass


@dataclass(frozen=True)
class InteractionRequest:
    request_id: str
    session_id: str
    node_id: str
    function: str
    implementation_key: str
    persistent: bool
    payload: dict[str, Any]

    def to_json(self) -> dict[str, Any]:
        return {
            "requestId": self.request_id,
            "sessionId": self.session_id,
            "nodeId": self.node_id,
            "function": self.function,
            "implementationKey": self.implementation_key,
            "persistent": self.persistent,
            "payload": self.payload,
        }

    @staticmethod
    def from_json(raw: dict[str, Any]) -> "InteractionRequest":
        return InteractionRequest(
            request_id=raw["requestId"],
            session_id=raw["sessionId"],
            node_id=raw["nodeId"],
            function=raw["function"],
            implementation_key=raw["implementationKey"],
            persistent=raw["persistent"],
            payload=raw["payload"],
        )


@dataclass(frozen=True)
class InteractionResponse:
    request_id: str
    # Exactly one of the three output kinds is set.
    labels: tuple[dict[str, Any], ...] | None = None
    categories: tuple[str, ...] | None = None
    samples: tuple[str, ...] | None = None

    def output_kind(self) -> str:
        kinds = [
            k for k, v in
            (("labels", self.labels), ("categories", self.categories),
             ("samples", self.samples))
            if v is not None
        ]
        if len(kinds) != 1:
            raise ValidationFailure("response must carry exactly one output kind")
        return kinds[0]

    def to_json(self) -> dict[str, Any]:
        outputs: dict[str, Any] = {}
        if self.labels is not None:
            outputs["labels"] = [dict(entry) for entry in self.labels]
        if self.categories is not None:
            outputs["categories"] = list(self.categories)
        if self.samples is not None:
            outputs["samples"] = list(self.samples)
        return {"requestId": self.request_id, "outputs": outputs}

    @staticmethod
    def from_json(raw: dict[str, Any]) -> "InteractionResponse":
        outputs = raw.get("outputs", {})
        unknown = set(outputs) - {"labels", "categories", "samples"}
        if unknown:
            raise ValidationFailure(f"unknown output kind(s): {sorted(unknown)}")
        labels = outputs.get("labels")
        return InteractionResponse(
            request_id=raw["requestId"],
            labels=tuple(labels) if labels is not None else None,
            categories=tuple(outputs["categories"]) if "categories" in outputs else None,
            samples=tuple(outputs["samples"]) if "samples" in outputs else None,
        )


def encode_wire(obj: InteractionRequest | InteractionResponse) -> str:
    """Canonical wire encoding; decode(encode(x)) == x bit-exactly."""
    return json.dumps(obj.to_json(), sort_keys=True, ensure_ascii=False,
                      separators=(",", ":"))


def validate_response(request: InteractionRequest, response: InteractionResponse) -> None:
    """Check the response invariants against its request payload."""
    kind = response.output_kind()
    payload = request.payload
    known_uuids = {item["uuid"] for item in payload.get("sampledObjects", [])}
    if kind == "labels":
        categories = set(payload.get("categories", []))
        seen: set[str] = set()
        for entry in response.labels:
            uuid = entry.get("uuid")
            if uuid not in known_uuids:
                raise ValidationFailure(f"label for uuid {uuid!r} not in the request")
            if uuid in seen:
                raise ValidationFailure(f"duplicate label for uuid {uuid!r}")
            seen.add(uuid)
            category = entry.get("category")
            if category not in categories:
                raise ValidationFailure(
                    f"category {category!r} not among the request categories"
                )
    elif kind == "samples":
        bad = set(response.samples) - known_uuids
        if bad:
            raise ValidationFailure(f"sample uuids not in the request: {sorted(bad)[:3]}")
    elif kind == "categories":
        if not all(isinstance(c, str) and c for c in response.categories):
            raise ValidationFailure("categories must be non-empty strings")
        if len(set(response.categories)) != len(response.categories):
            raise ValidationFailure("categories must be distinct")


class Gateway:
    """Queue of pending interaction requests shared with annotator clients."""

    def __init__(self) -> None:
        self._lock = threading.Condition()
        self._pending: dict[str, InteractionRequest] = {}
        self._answered: dict[str, InteractionResponse] = {}
        self._order: list[str] = []
        self._panels: dict[str, InteractionRequest] = {}  # standing panels by node id
        self._closed = False
        # Optional in-process auto-responder (the scripted oracle hook).
        self.auto_responder: Callable[[InteractionRequest], InteractionResponse] | None = None

    # -- engine side -----------------------------------------------------

    def submit_request(self, request: InteractionRequest) -> str:
        with self._lock:
            if self._closed:
                raise GatewayClosed("gateway is closed")
            if request.request_id in self._pending or request.request_id in self._answered:
                raise DuplicateRequestId(request.request_id)
            self._pending[request.request_id] = request
            self._order.append(request.request_id)
            if request.persistent:
                self._panels[request.node_id] = request
            self._lock.notify_all()
        responder = self.auto_responder
        if responder is not None:
            self.respond(responder(request))
        return request.request_id

    def await_response(self, request_id: str, timeout: float | None = None) -> InteractionResponse:
        with self._lock:
            deadline = None
            if timeout is not None:
                import time
                deadline = time.monotonic() + timeout
            while request_id not in self._answered:
                if self._closed:
                    raise GatewayClosed("gateway closed while awaiting a response")
                if request_id not in self._pending:
                    raise UnknownRequest(request_id)
                if deadline is None:
                    self._lock.wait()
                else:
                    import time
                    remaining = deadline - time.monotonic()
                    if remaining <= 0:
                        raise Timeout(f"no response to {request_id} in time")
                    self._lock.wait(remaining)
            return self._answered[request_id]

    def poll_response(self, request_id: str) -> InteractionResponse | None:
        with self._lock:
            return self._answered.get(request_id)

    def close(self) -> None:
        with self._lock:
            self._closed = True
            self._lock.notify_all()

    # -- client side -----------------------------------------------------

    def list_pending(self) -> list[InteractionRequest]:
        with self._lock:
            return [self._pending[rid] for rid in self._order if rid in self._pending]

    def list_panels(self) -> list[InteractionRequest]:
        with self._lock:
            return [self._panels[node_id] for node_id in sorted(self._panels)]

    def respond(self, response: InteractionResponse) -> None:
        """Accept a response: validates, rejects duplicates, wakes the engine."""
        with self._lock:
            rid = response.request_id
            if rid in self._answered:
                raise AlreadyAnswered(rid)
            request = self._pending.get(rid)
            if request is None:
                raise UnknownRequest(rid)
            validate_response(request, response)  # reject without consuming
            del self._pending[rid]
            self._answered[rid] = response
            self._lock.notify_all()
