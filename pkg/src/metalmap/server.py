"""Read-only HTTP service over exported map documents.

Routing is a pure function from (path, query) to a response, so the whole
surface is testable without sockets; a thin ThreadingHTTPServer wrapper
serves it for real. Documents are immutable after startup and no request
mutates them, so concurrent reads need no locking.

Endpoints:
    GET /api/maps                         -> JSON list of map names
    GET /api/maps/{name}                  -> full map document
    GET /api/maps/{name}/items?genre=&q=  -> filtered items (+count)
    GET /api/maps/{name}/background       -> PNG raster
    GET /api/items/{id}                   -> item details
    GET /thumbs/{id}                      -> logo image as PNG
    GET /                                  -> UI bundle (when configured)
"""
from __future__ import annotations

import io
import json
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, unquote

from PIL import Image

from .atlas import MapDocument, export_map, render_background_png

_STATIC_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".map": "application/json",
    ".png": "image/png",
    ".svg": "image/svg+xml",
    ".ico": "image/x-icon",
}

_PLACEHOLDER_PAGE = b"""<!doctype html>
<html><head><meta charset="utf-8"><title>map service</title></head>
<body><h1>Map service is running</h1>
<p>No UI bundle is configured. The JSON API lives under <code>/api/maps</code>.</p>
</body></html>
"""


@dataclass(frozen=True)
class Response:
    status: int
    content_type: str
    body: bytes


def _json_response(payload, status: int = 200) -> Response:
    body = json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return Response(status, "application/json", body.encode("utf-8"))


def _error(status: int, message: str) -> Response:
    return _json_response({"error": message}, status=status)


def filter_items(doc: MapDocument, genres: list[str], query: str) -> list:
    """Exact lowercased tag conjunction plus case-insensitive name substring."""
    items = list(doc.items)
    for genre in genres:
        tag = genre.lower()
        items = [item for item in items if tag in item.genres]
    if query:
        needle = query.lower()
        items = [item for item in items if needle in item.name.lower()]
    return items


class MapService:
    """Stateless request handling over preloaded documents."""

    def __init__(
        self,
        documents: dict[str, MapDocument],
        image_root: Path | None = None,
        ui_dir: Path | None = None,
    ):
        self.documents = dict(documents)
        self.image_root = Path(image_root) if image_root else None
        self.ui_dir = Path(ui_dir) if ui_dir else None
        self._item_maps: dict[str, str] = {}
        for name in sorted(self.documents):
            for item in self.documents[name].items:
                self._item_maps.setdefault(item.id, name)
        self._thumb_cache: dict[str, bytes] = {}

    # -- routing ---------------------------------------------------------

    def handle(self, path: str, query: str = "") -> Response:
        try:
            path = unquote(path)
        except ValueError:
            return _error(400, "malformed path")
        if path == "/api/maps" or path.startswith("/api/maps/"):
            return self._handle_maps(path, query)
        if path.startswith("/api/items/"):
            return self._handle_item(path[len("/api/items/") :])
        if path.startswith("/thumbs/"):
            return self._handle_thumb(path[len("/thumbs/") :])
        return self._handle_static(path)

    def _handle_maps(self, path: str, query: str) -> Response:
        rest = path[len("/api/maps") :]
        if rest in ("", "/"):
            return self._list_maps()
        parts = rest.lstrip("/").split("/")
        name = parts[0]
        doc = self.documents.get(name)
        if doc is None:
            return _error(404, f"unknown map {name!r}")
        if len(parts) == 1:
            return Response(200, "application/json", export_map(doc))
        if len(parts) == 2 and parts[1] == "items":
            return self._handle_items(doc, query)
        if len(parts) == 2 and parts[1] == "background":
            if doc.background is None:
                return _error(404, f"map {name!r} has no background")
            return Response(200, "image/png", render_background_png(doc.background))
        return _error(404, "unknown path")

    def _list_maps(self) -> Response:
        return _json_response(sorted(self.documents))

    def _handle_items(self, doc: MapDocument, query: str) -> Response:
        try:
            params = parse_qs(query, keep_blank_values=True, strict_parsing=bool(query))
        except ValueError:
            return _error(400, "malformed query string")
        unknown = sorted(set(params) - {"genre", "q"})
        if unknown:
            return _error(400, f"unknown query parameters: {', '.join(unknown)}")
        queries = params.get("q", [""])
        if len(queries) > 1:
            return _error(400, "q may appear at most once")
        items = filter_items(doc, params.get("genre", []), queries[0])
        return _json_response(
            {"count": len(items), "items": [item.to_json() for item in items]}
        )

    def _handle_item(self, item_id: str) -> Response:
        map_name = self._item_maps.get(item_id)
        if map_name is None:
            return _error(404, f"unknown item {item_id!r}")
        item = self.documents[map_name].item_index()[item_id]
        payload = item.to_json()
        payload["map"] = map_name
        return _json_response(payload)

    def _handle_thumb(self, item_id: str) -> Response:
        cached = self._thumb_cache.get(item_id)
        if cached is not None:
            return Response(200, "image/png", cached)
        map_name = self._item_maps.get(item_id)
        if map_name is None or self.image_root is None:
            return _error(404, f"no thumbnail for {item_id!r}")
        thumb_rel = self.documents[map_name].item_index()[item_id].thumb
        path = (self.image_root / thumb_rel).resolve()
        try:
            path.relative_to(self.image_root.resolve())
        except ValueError:
            return _error(404, f"no thumbnail for {item_id!r}")
        if not path.is_file():
            return _error(404, f"no thumbnail for {item_id!r}")
        with Image.open(path) as img:
            buf = io.BytesIO()
            img.convert("RGBA").save(buf, format="PNG")
        body = buf.getvalue()
        self._thumb_cache[item_id] = body
        return Response(200, "image/png", body)

    def _handle_static(self, path: str) -> Response:
        if self.ui_dir is None:
            if path == "/":
                return Response(200, "text/html; charset=utf-8", _PLACEHOLDER_PAGE)
            return _error(404, "unknown path")
        rel = "index.html" if path == "/" else path.lstrip("/")
        target = (self.ui_dir / rel).resolve()
        try:
            target.relative_to(self.ui_dir.resolve())
        except ValueError:
            return _error(404, "unknown path")
        if not target.is_file():
            return _error(404, "unknown path")
        content_type = _STATIC_TYPES.get(target.suffix, "application/octet-stream")
        return Response(200, content_type, target.read_bytes())


def load_documents(directory: Path) -> dict[str, MapDocument]:
    """Load every map_*.json document in a directory, keyed by map name."""
    from .atlas import import_map

    documents = {}
    for path in sorted(Path(directory).glob("map_*.json")):
        doc = import_map(path.read_bytes())
        documents[doc.name] = doc
    return documents


def make_http_server(service: MapService, host: str, port: int) -> ThreadingHTTPServer:
    class Handler(BaseHTTPRequestHandler):
        def do_GET(self):  # noqa: N802 (http.server API)
            path, _, query = self.path.partition("?")
            response = service.handle(path, query)
            self.send_response(response.status)
            self.send_header("Content-Type", response.content_type)
            self.send_header("Content-Length", str(len(response.body)))
            self.end_headers()
            self.wfile.write(response.body)

        def log_message(self, fmt, *args):
            pass

    return ThreadingHTTPServer((host, port), Handler)


def serve(service: MapService, host: str, port: int) -> None:
    """Block serving requests until interrupted."""
    server = make_http_server(service, host, port)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
        server.server_close()


def serve_background(service: MapService, host: str, port: int = 0):
    """Start the server on a daemon thread; returns (server, bound_port)."""
    server = make_http_server(service, host, port)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server, server.server_address[1]
