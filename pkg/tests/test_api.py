"""
规划器 HTTP 接口测试
"""
import pytest
from fastapi.testclient import TestClient

from main import create_app
from spatialplan import render_plan_prompt

LISTING = "Plan:\n1. move [-1, 0, 0] [0.19]\n2. move [0, 0, -1] [0.21]\n3. push [0, 0, 0] [0.00]"


@pytest.fixture(scope="module")
def client():
    with TestClient(create_app()) as c:
        yield c


def test_health(client):
    response = client.get("/api/v1/health")
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "healthy"
    assert body["planner"]["agent_id"]


def test_plan(client):
    response = client.post("/api/v1/plan", json={"p_ee": [0.19, 0, 0.21], "p_obj": [0, 0, 0], "task": "push"})
    assert response.status_code == 200
    body = response.json()
    assert body["plan_text"] == LISTING
    assert body["delta_p"] == pytest.approx([-0.19, 0.0, -0.21])
    assert [g["action_type"] for g in body["subgoals"]] == ["move", "move", "push"]


def test_plan_unknown_task(client):
    response = client.post("/api/v1/plan", json={"p_ee": [0, 0, 0], "p_obj": [0, 0, 0], "task": "stack"})
    assert response.status_code == 422


def test_parse_round_trip(client):
    response = client.post("/api/v1/plan/parse", json={"plan_text": LISTING})
    assert response.status_code == 200
    body = response.json()
    assert body["plan_text"] == LISTING
    assert body["delta_p"] == pytest.approx([-0.19, 0.0, -0.21])


def test_parse_reports_line_number(client):
    response = client.post("/api/v1/plan/parse", json={"plan_text": "Plan:\n2. move [1, 0, 0] [0.10]"})
    assert response.status_code == 422
    assert response.json()["detail"]["line_number"] == 2


def test_oracle_replies_with_plan_text(client):
    prompt = render_plan_prompt([-0.19, 0.0, -0.21], "push")
    response = client.post("/api/v1/oracle", json={"prompt": prompt, "model": "rule"})
    assert response.status_code == 200
    assert response.headers["content-type"].startswith("text/plain")
    assert response.text == LISTING


def test_oracle_rejects_unstructured_prompt(client):
    response = client.post("/api/v1/oracle", json={"prompt": "move the block please"})
    assert response.status_code == 422
