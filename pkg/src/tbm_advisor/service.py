"""HTTP JSON service over a frozen model and its physics rules.

One model per process, loaded at startup and never mutated, so every
endpoint is a pure function of the request body and concurrent identical
requests get identical bytes back.  Built on the stdlib threading server;
there is no model hot-reload on purpose.
"""
from __future__ import annotations

import json
import math
import signal
import sys
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from . import decision, mapping, physics as physics_mod
from .datagen import FEATURE_NAMES
from .errors import DomainError, InvalidInputError

DEFAULT_MAX_REQUEST_BYTES = 1 << 20


@dataclass
class ServiceConfig:
    model_path: str
    physics_path: str
    host: str = "127.0.0.1"
    port: int = 8765
    limits: decision.RatedLimits | None = None
    cost_model: decision.CostModel | None = None
    max_request_bytes: int = DEFAULT_MAX_REQUEST_BYTES


class AdvisorService:
    """Request handlers, independent of any transport."""

    def __init__(self, model, rules, limits=None, cost_model=None,
                 metrics: dict | None = None,
                 max_request_bytes: int = DEFAULT_MAX_REQUEST_BYTES):
        if model.physics_digest and model.physics_digest != physics_mod.rules_digest(rules):
            raise InvalidInputError(
                "physics rules do not match the ones the model was trained "
                "against (digest mismatch)"
            )
        self.model = model
        self.rules = rules
        self.limits = limits
        self.cost_model = cost_model
        self.metrics = metrics
        self.max_request_bytes = int(max_request_bytes)
        self.digest = mapping.model_digest(model)

    # each handler returns (status, document)

    def handle_healthz(self):
        return 200, {"status": "ok", "model_digest": self.digest}

    def handle_model(self):
        hp = self.model.hyperparams
        return 200, {
            "dims": {"in": 9, "h1": hp.h1, "h2": hp.h2, "out": 4},
            "activation": "relu",
            "hyperparams": hp.to_dict(),
            "physics_digest": self.model.physics_digest,
            "metrics": self.metrics,
            "model_digest": self.digest,
        }

    def handle_predict(self, doc):
        if not isinstance(doc, dict):
            raise InvalidInputError("request body must be a JSON object")
        unknown = set(doc) - set(FEATURE_NAMES)
        if unknown:
            raise InvalidInputError(f"unknown feature field: {sorted(unknown)[0]}")
        row = []
        for name in FEATURE_NAMES:
            if name not in doc:
                raise InvalidInputError(f"missing feature field: {name}")
            try:
                v = float(doc[name])
            except (TypeError, ValueError):
                v = math.nan
            if not math.isfinite(v):
                raise InvalidInputError(f"feature {name} must be a finite number")
            row.append(v)
        pred = self.model.predict(np.array(row))
        warnings = []
        for i, name in enumerate(FEATURE_NAMES):
            lo = self.model.feature_min[i]
            hi = self.model.feature_max[i]
            if not lo <= row[i] <= hi:
                warnings.append(f"{name} outside training range [{lo}, {hi}]")
        return 200, {
            "th": float(pred[mapping.TH_IDX]),
            "tor": float(pred[mapping.TOR_IDX]),
            "hf": float(pred[mapping.HF_IDX]),
            "pb": float(pred[mapping.PB_IDX]),
            "warnings": warnings,
            "model_digest": self.digest,
        }

    def handle_optimize(self, doc):
        if not isinstance(doc, dict):
            raise InvalidInputError("request body must be a JSON object")
        known = {"context", "limits", "cost", "grid", "include_grid"}
        unknown = set(doc) - known
        if unknown:
            raise InvalidInputError(f"unknown request field: {sorted(unknown)[0]}")
        if "context" not in doc:
            raise InvalidInputError("missing field: context")
        ctx = decision.DecisionContext.from_dict(doc["context"])
        limits = (
            decision.RatedLimits.from_dict(doc["limits"])
            if "limits" in doc else self.limits
        )
        cost_model = (
            decision.CostModel.from_dict(doc["cost"])
            if "cost" in doc else self.cost_model
        )
        grid = decision.GridSpec.from_dict(doc["grid"]) if "grid" in doc else None
        include_grid = doc.get("include_grid", True)
        if not isinstance(include_grid, bool):
            raise InvalidInputError("include_grid must be a boolean")
        return 200, decision.optimize_document(
            self.model, self.rules, ctx, limits, cost_model, grid,
            include_grid=include_grid, model_digest=self.digest,
        )


def load_service(config: ServiceConfig) -> AdvisorService:
    model = mapping.load_model(config.model_path)
    rules = physics_mod.load_rules(config.physics_path)
    return AdvisorService(
        model, rules, limits=config.limits, cost_model=config.cost_model,
        max_request_bytes=config.max_request_bytes,
    )


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "tbm-advisor"

    @property
    def service(self) -> AdvisorService:
        return self.server.service

    def log_message(self, format, *args):  # quiet unless asked for
        if getattr(self.server, "verbose", False):
            sys.stderr.write(
                "%s - %s\n" % (self.address_string(), format % args)
            )

    def _send(self, code: int, doc: dict):
        body = decision.dumps_document(doc).encode()
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _read_body(self):
        length = self.headers.get("Content-Length")
        try:
            length = int(length)
        except (TypeError, ValueError):
            raise InvalidInputError("Content-Length header is required")
        if length > self.service.max_request_bytes:
            return None  # signals 413 to the caller
        raw = self.rfile.read(length)
        try:
            return json.loads(raw)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"request body is not valid JSON: {exc}")

    def do_OPTIONS(self):
        # CORS preflight, so browser front ends on another origin can POST
        # JSON bodies.  The API itself is origin-agnostic.
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self):
        if self.path == "/healthz":
            self._send(*self.service.handle_healthz())
        elif self.path == "/model":
            self._send(*self.service.handle_model())
        elif self.path in ("/predict", "/optimize"):
            self._send(405, {"error": f"{self.path} requires POST"})
        else:
            self._send(404, {"error": f"no such endpoint: {self.path}"})

    def do_POST(self):
        routes = {
            "/predict": self.service.handle_predict,
            "/optimize": self.service.handle_optimize,
        }
        handler = routes.get(self.path)
        if handler is None:
            if self.path in ("/healthz", "/model"):
                self._send(405, {"error": f"{self.path} requires GET"})
            else:
                self._send(404, {"error": f"no such endpoint: {self.path}"})
            return
        try:
            doc = self._read_body()
            if doc is None:
                self._send(413, {"error": "request body too large"})
                return
            self._send(*handler(doc))
        except (InvalidInputError, DomainError) as exc:
            self._send(400, {"error": str(exc)})
        except Exception as exc:  # pragma: no cover - defensive
            self._send(500, {"error": f"internal error: {exc}"})


class AdvisorServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address, service: AdvisorService, verbose: bool = False):
        super().__init__(address, _Handler)
        self.service = service
        self.verbose = verbose


def start_server(service: AdvisorService, host: str = "127.0.0.1",
                 port: int = 0, verbose: bool = False) -> AdvisorServer:
    """Bind and return the server; the caller drives serve_forever()."""
    return AdvisorServer((host, port), service, verbose=verbose)


def run(config: ServiceConfig, verbose: bool = True) -> int:
    """Blocking entry point with signal-driven graceful shutdown."""
    service = load_service(config)
    server = start_server(service, config.host, config.port, verbose=verbose)
    host, port = server.server_address[:2]
    sys.stderr.write(
        f"serving model {service.digest[:12]} on http://{host}:{port}\n"
    )

    def _stop(signum, frame):
        threading.Thread(target=server.shutdown).start()

    signal.signal(signal.SIGINT, _stop)
    signal.signal(signal.SIGTERM, _stop)
    try:
        server.serve_forever()
    finally:
        server.server_close()
    sys.stderr.write("shutdown complete\n")
    return 0
