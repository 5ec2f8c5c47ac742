"""Read-only HTTP service over a validated bundle.

All analytics are precomputed; every endpoint answers from the immutable
in-memory bundle, so concurrent requests are safe and responses cacheable.
Network queries snap to the nearest precomputed (level, resolution) pair and
the response reports which pair was served.
"""

from __future__ import annotations

import json
import mimetypes
import posixpath
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional
from urllib.parse import parse_qs, unquote, urlsplit

from . import SCHEMA_VERSION
from .bundle import Bundle

DEFAULT_PORT = 8000
PORT_ENV_VAR = "DEBATEMAP_PORT"


def nearest_pair(
    pairs: list[tuple[float, float]], level: float, resolution: float
) -> tuple[float, float]:
    """Advertised (level, resolution) closest to the request; ties to the smaller pair."""
    return min(pairs, key=lambda p: ((p[0] - level) ** 2 + (p[1] - resolution) ** 2, p))


class _BadRequest(Exception):
    """Maps to a 400 response."""


def _parse_float(query: dict, key: str, default: float, low: float, high: float) -> float:
    values = query.get(key)
    if not values:
        return default
    try:
        value = float(values[0])
    except ValueError:
        raise _BadRequest(f"query parameter {key} must be a number") from None
    if not low <= value <= high or value != value:
        raise _BadRequest(f"query parameter {key} must be in [{low}, {high}]")
    return value


class BundleRequestHandler(BaseHTTPRequestHandler):
    """GET-only handler; the bundle and static root hang off the server object."""

    server_version = "debatemap"
    protocol_version = "HTTP/1.1"

    def log_message(self, format: str, *args) -> None:  # noqa: A002 - base signature
        if getattr(self.server, "verbose", False):
            super().log_message(format, *args)

    @property
    def bundle(self) -> Bundle:
        return self.server.bundle  # type: ignore[attr-defined]

    def do_GET(self) -> None:  # noqa: N802 - http.server naming
        split = urlsplit(self.path)
        path = split.path
        try:
            query = parse_qs(split.query, strict_parsing=bool(split.query))
        except ValueError:
            self._send_error(400, "malformed query string")
            return
        try:
            if path == "/api/meta":
                self._send_json(self.bundle.manifest)
            elif path == "/api/landscape":
                self._send_json(self.bundle.landscape)
            elif path == "/api/stats":
                self._send_json(self.bundle.stats)
            elif path == "/api/topics":
                self._send_json(self.bundle.topics)
            elif path.startswith("/api/topics/") and path.endswith("/speeches"):
                self._topic_speeches(path, query)
            elif path.startswith("/api/speech/"):
                self._speech(path)
            elif path == "/api/network":
                self._network(query)
            elif path.startswith("/api"):
                self._send_error(404, f"unknown endpoint {path}")
            else:
                self._static(path)
        except _BadRequest as exc:
            self._send_error(400, str(exc))
        except Exception as exc:  # noqa: BLE001 - keep the server up
            self._send_error(500, f"{type(exc).__name__}: {exc}")

    def _topic_speeches(self, path: str, query: dict) -> None:
        raw = path[len("/api/topics/") : -len("/speeches")]
        topic = self._topic_index(raw)
        if topic is None:
            self._send_error(404, f"unknown topic {raw!r}")
            return
        threshold = _parse_float(
            query, "threshold", self.bundle.manifest.get("default_threshold", 0.20), 0.0, 1.0
        )
        ranked = [
            entry for entry in self.bundle.prominent[topic] if entry["score"] > threshold
        ]
        self._send_json(
            {
                "schema_version": SCHEMA_VERSION,
                "topic": f"T{topic}",
                "threshold": threshold,
                "speeches": ranked,
            }
        )

    def _topic_index(self, raw: str) -> Optional[int]:
        raw = unquote(raw)
        if raw.startswith("T"):
            raw = raw[1:]
        if not raw.isdigit():
            return None
        topic = int(raw)
        return topic if 0 <= topic < self.bundle.k else None

    def _speech(self, path: str) -> None:
        speech_id = unquote(path[len("/api/speech/") :])
        record = self.bundle.speeches.get(speech_id)
        if record is None:
            self._send_error(404, f"unknown speech id {speech_id!r}")
        else:
            self._send_json(record)

    def _network(self, query: dict) -> None:
        manifest = self.bundle.manifest
        mode_values = query.get("mode", ["two"])
        mode = mode_values[0]
        if mode not in manifest.get("modes", []):
            raise _BadRequest(f"mode must be one of {manifest.get('modes')}, got {mode!r}")
        level = _parse_float(query, "level", manifest.get("default_level", 0.25), 0.0, 1.0)
        resolution = _parse_float(
            query, "resolution", manifest.get("default_resolution", 1.0), 0.0, 1e9
        )
        pairs = self.bundle.advertised_pairs(mode)
        served_level, served_resolution = nearest_pair(pairs, level, resolution)
        self._send_json(
            {
                "schema_version": SCHEMA_VERSION,
                "requested": {"level": level, "resolution": resolution, "mode": mode},
                "served": {"level": served_level, "resolution": served_resolution, "mode": mode},
                "graph": self.bundle.networks[(mode, served_level, served_resolution)],
            }
        )

    def _static(self, path: str) -> None:
        static_root: Optional[Path] = getattr(self.server, "static_root", None)
        if static_root is None:
            self._send_error(404, "no static content configured")
            return
        clean = posixpath.normpath(unquote(path))
        if clean in ("/", "."):
            clean = "/index.html"
        candidate = (static_root / clean.lstrip("/")).resolve()
        if not str(candidate).startswith(str(static_root.resolve())) or not candidate.is_file():
            self._send_error(404, f"no such file {path}")
            return
        content_type = mimetypes.guess_type(candidate.name)[0] or "application/octet-stream"
        body = candidate.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Cache-Control", "public, max-age=60")
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, payload: dict, status: int = 200) -> None:
        body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        if status == 200:
            self.send_header("Cache-Control", "public, max-age=3600")
        self.end_headers()
        self.wfile.write(body)

    def _send_error(self, status: int, message: str) -> None:
        self._send_json({"status": status, "error": message}, status=status)


def create_server(
    bundle: Bundle,
    port: int = 0,
    host: str = "127.0.0.1",
    static_root: Optional[Path | str] = None,
    verbose: bool = False,
) -> ThreadingHTTPServer:
    """Bind a threaded server over a validated bundle; port 0 picks a free port."""
    server = ThreadingHTTPServer((host, port), BundleRequestHandler)
    server.bundle = bundle  # type: ignore[attr-defined]
    server.static_root = Path(static_root) if static_root else None  # type: ignore[attr-defined]
    server.verbose = verbose  # type: ignore[attr-defined]
    return server
