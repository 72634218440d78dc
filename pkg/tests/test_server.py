from __future__ import annotations

import io
import json
import urllib.request

import pytest

from metalmap.atlas import (
    BackgroundRaster,
    GridAssignment,
    MapDocument,
    assemble_map,
    import_map,
)
from metalmap.cli import main
from metalmap.corpus import BandRecord
from metalmap.embed import Layout2D
from metalmap.server import MapService, filter_items, serve_background
from conftest import rng_for


def build_document(name="demo", n=12) -> MapDocument:
    genres = ["Black Metal", "Death Metal", "Black/Death Metal"]
    records = [
        BandRecord.build(
            id=f"b{i:02d}",
            name=f"Band Number {i}",
            genre_raw=genres[i % 3],
            themes=("death",),
            label="L",
            status="Active",
            logo_path=f"logos/b{i:02d}.png",
        )
        for i in range(n)
    ]
    rng = rng_for(f"server-doc-{name}")
    ids = tuple(r.id for r in records)
    layout = Layout2D(ids=ids, coordinates=rng.uniform(-5, 5, size=(n, 2)))
    side = 4
    cells = {r.id: (i % side, i // side) for i, r in enumerate(records)}
    grid = GridAssignment(level=2, curve="hilbert", cells=cells)
    provenance = {
        "feature_kind": "tag",
        "metric": "sokal_michener",
        "embed_params": {"seed": 0},
        "grid_level": 2,
        "curve": "hilbert",
        "collision_policy": "forward-wrap",
    }
    background = BackgroundRaster(
        width=2, height=2,
        genres=("black metal",) * 4, colors=("#ffffff",) * 4,
    )
    return assemble_map(records, layout, grid, provenance, name=name, background=background)


@pytest.fixture(scope="module")
def service(tmp_path_factory) -> MapService:
    image_root = tmp_path_factory.mktemp("images")
    (image_root / "logos").mkdir()
    from PIL import Image

    Image.new("RGBA", (8, 8), (255, 0, 0, 255)).save(image_root / "logos" / "b00.png")
    docs = {d.name: d for d in (build_document("demo"), build_document("second"))}
    return MapService(docs, image_root=image_root)


def get_json(service: MapService, path: str, query: str = ""):
    response = service.handle(path, query)
    assert response.content_type == "application/json"
    return response.status, json.loads(response.body)


# -- routes -------------------------------------------------------------------

def test_list_maps(service):
    status, payload = get_json(service, "/api/maps")
    assert status == 200
    assert payload == ["demo", "second"]


def test_get_map_document_round_trips(service):
    response = service.handle("/api/maps/demo")
    assert response.status == 200
    doc = import_map(response.body)
    assert doc.name == "demo"
    assert len(doc.items) == 12


def test_unknown_map_404(service):
    status, payload = get_json(service, "/api/maps/unknown")
    assert status == 404
    assert "unknown" in payload["error"]


def test_items_filter_matches_client_side_recount(service):
    status, payload = get_json(service, "/api/maps/demo/items", "genre=black+metal")
    assert status == 200
    doc = import_map(service.handle("/api/maps/demo").body)
    expected = [item for item in doc.items if "black metal" in item.genres]
    assert payload["count"] == len(expected)
    assert [item["id"] for item in payload["items"]] == [item.id for item in expected]


def test_items_filter_conjunction(service):
    _, both = get_json(service, "/api/maps/demo/items", "genre=black+metal&genre=death+metal")
    doc = import_map(service.handle("/api/maps/demo").body)
    expected = [
        item.id
        for item in doc.items
        if "black metal" in item.genres and "death metal" in item.genres
    ]
    assert [item["id"] for item in both["items"]] == expected


def test_items_name_query(service):
    _, payload = get_json(service, "/api/maps/demo/items", "q=number+3")
    assert [item["id"] for item in payload["items"]] == ["b03"]


def test_items_empty_filter_returns_all(service):
    _, payload = get_json(service, "/api/maps/demo/items")
    assert payload["count"] == 12


def test_items_unknown_parameter_400(service):
    status, payload = get_json(service, "/api/maps/demo/items", "colour=red")
    assert status == 400
    assert "colour" in payload["error"]


def test_items_malformed_query_400(service):
    status, _ = get_json(service, "/api/maps/demo/items", "genre")
    assert status == 400


def test_item_detail(service):
    status, payload = get_json(service, "/api/items/b01")
    assert status == 200
    assert payload["name"] == "Band Number 1"
    assert payload["map"] == "demo"


def test_item_detail_404(service):
    status, _ = get_json(service, "/api/items/zzz")
    assert status == 404


def test_background_png(service):
    response = service.handle("/api/maps/demo/background")
    assert response.status == 200
    assert response.content_type == "image/png"
    assert response.body[:8] == b"\x89PNG\r\n\x1a\n"


def test_thumbs_png_and_missing(service):
    response = service.handle("/thumbs/b00")
    assert response.status == 200
    assert response.content_type == "image/png"
    assert response.body[:8] == b"\x89PNG\r\n\x1a\n"
    assert service.handle("/thumbs/b01").status == 404  # no file on disk
    assert service.handle("/thumbs/none").status == 404


def test_unknown_path_404(service):
    assert service.handle("/api/other").status == 404
    assert service.handle("/nothing.txt").status == 404


def test_root_placeholder_without_ui(service):
    response = service.handle("/")
    assert response.status == 200
    assert response.content_type.startswith("text/html")


def test_static_ui_served(tmp_path):
    ui = tmp_path / "dist"
    ui.mkdir()
    (ui / "index.html").write_text("<html>ui</html>", encoding="utf-8")
    (ui / "main.js").write_text("console.log('hi')", encoding="utf-8")
    svc = MapService({"demo": build_document()}, ui_dir=ui)
    assert b"ui" in svc.handle("/").body
    assert svc.handle("/main.js").content_type.startswith("text/javascript")
    assert svc.handle("/../secrets").status == 404


def test_repeated_gets_are_byte_identical(service):
    for path, query in [
        ("/api/maps", ""),
        ("/api/maps/demo", ""),
        ("/api/maps/demo/items", "genre=black+metal"),
        ("/api/maps/demo/background", ""),
    ]:
        first = service.handle(path, query)
        second = service.handle(path, query)
        assert first.body == second.body
        assert first.status == second.status


def test_randomized_genre_queries_match_client_filter(service):
    doc = import_map(service.handle("/api/maps/demo").body)
    tags = sorted({tag for item in doc.items for tag in item.genres})
    rng = rng_for("server-random-queries")
    for _ in range(50):
        genre = tags[int(rng.integers(0, len(tags)))]
        _, payload = get_json(service, "/api/maps/demo/items", f"genre={genre.replace(' ', '+')}")
        expected = [item.id for item in doc.items if genre in item.genres]
        assert [item["id"] for item in payload["items"]] == expected


def test_filter_items_pure_function(service):
    doc = service.documents["demo"]
    before = [item.id for item in doc.items]
    filter_items(doc, ["black metal"], "band")
    assert [item.id for item in doc.items] == before


# -- live server ---------------------------------------------------------------

def test_live_server_round_trip(service):
    server, port = serve_background(service, "127.0.0.1", 0)
    try:
        with urllib.request.urlopen(f"http://127.0.0.1:{port}/api/maps") as response:
            assert response.status == 200
            names = json.loads(response.read())
        assert names == ["demo", "second"]
        with urllib.request.urlopen(
            f"http://127.0.0.1:{port}/api/maps/demo/items?genre=black+metal"
        ) as response:
            payload = json.loads(response.read())
        assert payload["count"] > 0
        with pytest.raises(urllib.error.HTTPError) as excinfo:
            urllib.request.urlopen(f"http://127.0.0.1:{port}/api/maps/nope")
        assert excinfo.value.code == 404
    finally:
        server.shutdown()
        server.server_close()
