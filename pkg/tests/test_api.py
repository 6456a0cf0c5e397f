"""REST API 测试"""

import pytest

from src.api.server import app


@pytest.fixture
def client():
    app.config['TESTING'] = True
    with app.test_client() as client:
        yield client


def test_index(client):
    response = client.get('/api')
    assert response.status_code == 200
    assert '/api/verify/<suite>' in response.get_json()['endpoints']


class TestFunctions:
    def test_list(self, client):
        functions = client.get('/api/functions/').get_json()['data']['functions']
        assert 'qcos' in functions
        assert 'hahn_exton' in functions

    def test_cosine_at_origin(self, client):
        response = client.get('/api/functions/qcos?x=0')
        assert response.status_code == 200
        data = response.get_json()['data']
        assert data['function'] == 'qcos'
        assert data['q'] == 0.5
        assert data['report']['text'] == '1.0'

    def test_scalar_function(self, client):
        data = client.get('/api/functions/qgamma?x=1&q=0.3').get_json()['data']
        assert data['report']['value'] == pytest.approx(1.0, rel=1e-14)

    def test_grid_point_argument(self, client):
        response = client.get('/api/functions/jalpha?k=2&alpha=0.5&q_structural=1')
        assert response.status_code == 200

    def test_pole_region_is_unprocessable(self, client):
        response = client.get('/api/functions/qexp_e?x=3')
        assert response.status_code == 422
        body = response.get_json()
        assert body['error'] == 'QPoleError'
        assert body['status'] == 'error'

    @pytest.mark.parametrize("url", [
        '/api/functions/qcos',
        '/api/functions/qcos?x=1&k=1',
        '/api/functions/qcos?x=abc',
        '/api/functions/qtan?x=1',
        '/api/functions/qcos?x=1&q=2',
        '/api/functions/qcos?x=1&q=0.5&precision=quad',
    ])
    def test_bad_requests(self, client, url):
        response = client.get(url)
        assert response.status_code == 400
        assert response.get_json()['code'] == 400


class TestConfig:
    def test_full_config(self, client):
        config = client.get('/api/config/').get_json()['data']['config']
        assert config['q'] == 0.5

    def test_nested_key(self, client):
        data = client.get('/api/config/grid.k_min').get_json()['data']
        assert data == {'key': 'grid.k_min', 'value': -40}

    def test_missing_key(self, client):
        response = client.get('/api/config/grid.nope')
        assert response.status_code == 404


class TestVerify:
    def test_list(self, client):
        suites = client.get('/api/verify/').get_json()['data']['suites']
        assert suites[-1] == 'all'
        assert 'core' in suites

    def test_run_core(self, client):
        response = client.get('/api/verify/core?q=0.5')
        assert response.status_code == 200
        report = response.get_json()['data']
        assert report['suite'] == 'core'
        assert report['passed'] is True
        assert 'wall_clock' in report

    def test_unknown_suite(self, client):
        assert client.get('/api/verify/galaxy').status_code == 400


def test_unknown_route(client):
    response = client.get('/api/nothing-here')
    assert response.status_code == 404
    assert response.get_json()['status'] == 'error'
