from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from evgraph.sentinel import ModuleRegistry
from evgraph.service import create_app
from evgraph.wire import InterfaceDecl, ModuleDescriptor


@pytest.fixture()
def registry() -> ModuleRegistry:
    return ModuleRegistry()


@pytest.fixture()
def client(registry) -> TestClient:
    return TestClient(create_app(registry))


def register_chain(registry: ModuleRegistry) -> tuple[int, int, int]:
    gen = registry.register(
        ModuleDescriptor("gen", (InterfaceDecl("out", "out", ""),), frozenset({"send"}))
    )
    flt = registry.register(
        ModuleDescriptor(
            "flt",
            (InterfaceDecl("in", "in", "127.0.0.1:7101"), InterfaceDecl("out", "out", "")),
            frozenset({"send", "receive"}),
        )
    )
    sink = registry.register(
        ModuleDescriptor("sink", (InterfaceDecl("in", "in", "127.0.0.1:7102"),), frozenset({"receive"}))
    )
    return gen, flt, sink


class TestModules:
    def test_empty_table(self, client):
        response = client.get("/modules")
        assert response.status_code == 200
        assert response.json() == []

    def test_module_rows(self, registry, client):
        register_chain(registry)
        rows = client.get("/modules").json()
        assert [r["name"] for r in rows] == ["gen", "flt", "sink"]
        flt = rows[1]
        assert flt["id"] == 2
        assert flt["features"] == ["receive", "send"]  # sorted
        assert flt["status"] == "registered"
        assert flt["producers"] == []
        assert flt["consumers"] == []
        assert flt["interfaces"] == [
            {"name": "in", "direction": "in", "address": "127.0.0.1:7101"},
            {"name": "out", "direction": "out", "address": ""},
        ]

    def test_status_changes_visible(self, registry, client):
        gen, _, _ = register_chain(registry)
        registry.update_status(gen, "running")
        rows = client.get("/modules").json()
        assert rows[0]["status"] == "running"


class TestWire:
    def test_wire_success(self, registry, client):
        gen, flt, _ = register_chain(registry)
        response = client.post("/wire", json={"producer": gen, "consumer": flt})
        assert response.status_code == 200
        assert response.json() == {"producer": gen, "consumer": flt, "address": "127.0.0.1:7101"}
        rows = {r["id"]: r for r in client.get("/modules").json()}
        assert rows[gen]["consumers"] == [flt]
        assert rows[flt]["producers"] == [gen]

    def test_unknown_module_is_404(self, registry, client):
        gen, _, _ = register_chain(registry)
        response = client.post("/wire", json={"producer": gen, "consumer": 99})
        assert response.status_code == 404
        assert response.json()["detail"]["error"] == "UnknownModule"

    def test_feature_mismatch_is_409(self, registry, client):
        gen, flt, sink = register_chain(registry)
        response = client.post("/wire", json={"producer": sink, "consumer": flt})
        assert response.status_code == 409
        assert response.json()["detail"]["error"] == "FeatureMismatch"

    def test_no_input_interface_is_409(self, registry, client):
        gen, _, _ = register_chain(registry)
        headless = registry.register(
            ModuleDescriptor("h", (InterfaceDecl("in", "in", ""),), frozenset({"receive"}))
        )
        response = client.post("/wire", json={"producer": gen, "consumer": headless})
        assert response.status_code == 409
        assert response.json()["detail"]["error"] == "NoInputInterface"

    def test_rejected_wire_changes_nothing(self, registry, client):
        gen, flt, sink = register_chain(registry)
        client.post("/wire", json={"producer": gen, "consumer": flt})
        before = client.get("/modules").json()
        response = client.post("/wire", json={"producer": sink, "consumer": flt})
        assert response.status_code == 409
        assert client.get("/modules").json() == before
        assert client.get("/topology").json() == [{"producer": gen, "consumer": flt}]

    def test_malformed_body_is_422(self, client):
        assert client.post("/wire", json={"producer": "x"}).status_code == 422


class TestTopology:
    def test_empty(self, client):
        assert client.get("/topology").json() == []

    def test_edges_in_order(self, registry, client):
        gen, flt, sink = register_chain(registry)
        client.post("/wire", json={"producer": flt, "consumer": sink})
        client.post("/wire", json={"producer": gen, "consumer": flt})
        assert client.get("/topology").json() == [
            {"producer": gen, "consumer": flt},
            {"producer": flt, "consumer": sink},
        ]


class TestView:
    def test_missing_view_is_404(self, client):
        response = client.get("/view")
        assert response.status_code == 404
        assert response.json()["detail"]["error"] == "NoView"

    def test_round_trip(self, client):
        doc = {"processes": 2, "events": [], "relations": [], "anomalies": [], "runs": []}
        body = json.dumps(doc, separators=(",", ":"))
        response = client.post("/view", content=body.encode("utf-8"))
        assert response.status_code == 200
        assert response.json() == {"stored": len(body)}
        fetched = client.get("/view")
        assert fetched.status_code == 200
        assert fetched.headers["content-type"].startswith("application/json")
        assert fetched.text == body  # byte-for-byte what was pushed

    def test_last_push_wins(self, client):
        client.post("/view", content=b'{"processes":1}')
        client.post("/view", content=b'{"processes":2}')
        assert client.get("/view").text == '{"processes":2}'
