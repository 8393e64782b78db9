mod common;

use std::collections::BTreeSet;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use serde_json::{json, Value};
use tower::ServiceExt;

use attache_core::domain::{CommunityId, MetricId};
use attache_core::fixture::FixtureSpec;
use attache_core::{CommunityRegistry, Selection, SelectionLevel, YearFilter};
use attache_service::RouterOptions;
use common::*;

#[tokio::test]
async fn sweep_validates_against_schemas() {
    let (app, _) = fixture_app();
    let schemas = Schemas::load();
    assert_eq!(schemas.names().len(), 11);
    for uri in request_sweep() {
        let (status, body) = get_json(&app, &uri).await;
        assert_eq!(status, StatusCode::OK, "{uri}: {body}");
        schemas
            .check(endpoint(&uri), &body)
            .unwrap_or_else(|e| panic!("{uri}: {e}"));
    }
}

#[tokio::test]
async fn repeated_requests_are_byte_identical() {
    let (app, _) = fixture_app();
    for uri in request_sweep() {
        let (_, a) = get_raw(&app, &uri).await;
        let (_, b) = get_raw(&app, &uri).await;
        assert_eq!(a, b, "{uri}");
    }
}

#[tokio::test]
async fn concurrent_identical_requests_agree() {
    let (app, _) = fixture_app();
    let uri = "/api/correlations?level=region&id=west&years=all";
    let handles: Vec<_> = (0..16)
        .map(|_| {
            let app = app.clone();
            tokio::spawn(async move { get_raw(&app, uri).await.1 })
        })
        .collect();
    let mut bodies = BTreeSet::new();
    for h in handles {
        bodies.insert(h.await.unwrap());
    }
    assert_eq!(bodies.len(), 1);
}

#[tokio::test]
async fn responses_equal_direct_library_calls() {
    let (app, snap) = fixture_app();
    let all = YearFilter::AllYears;
    let y2009: YearFilter = "2009".parse().unwrap();
    let rust_belt = Selection::new(
        SelectionLevel::Region(attache_core::RegionId::RustBelt),
        all,
    );
    let ids: Vec<CommunityId> = ["detroit-mi", "gary-in"]
        .map(|s| CommunityId::new(s).unwrap())
        .to_vec();
    let cases: Vec<(&str, Value)> = vec![
        (
            "/api/map?metric=education&years=all",
            json!({"metric": "education", "years": "all", "points": snap.map_summary(MetricId::Education, all)}),
        ),
        (
            "/api/bars?community=detroit-mi&metric=community_attachment&years=all",
            json!(snap
                .bar_chart_data(MetricId::CommunityAttachment, all, "detroit-mi")
                .unwrap()),
        ),
        (
            "/api/dotplot?metric=openness&years=2009",
            json!(snap.community_means(MetricId::Openness, y2009)),
        ),
        (
            "/api/correlations?level=region&id=rust_belt&years=all",
            json!({"profile": snap.correlation_profile(&rust_belt).unwrap(), "reference": snap.reference_profile(all)}),
        ),
        (
            "/api/bin2d?x=economy&y=safety&level=region&id=rust_belt&nx=7&ny=3",
            json!(snap
                .bin2d(MetricId::Economy, MetricId::Safety, &rust_belt, 7, 3)
                .unwrap()),
        ),
        (
            "/api/series?metric=economy&communities=detroit-mi,gary-in&years=each",
            json!({"metric": "economy", "series": snap.yearly_series(MetricId::Economy, &ids).unwrap()}),
        ),
        (
            "/api/parallel?years=all",
            json!(snap.parallel_coordinates(all)),
        ),
        (
            "/api/density?metric=safety&level=region&id=rust_belt&points=100",
            json!(snap
                .density_estimate(MetricId::Safety, &rust_belt, 100)
                .unwrap()),
        ),
        ("/api/communities", json!(snap.registry().communities())),
    ];
    for (uri, want) in cases {
        let (status, got) = get_json(&app, uri).await;
        assert_eq!(status, StatusCode::OK, "{uri}");
        assert_eq!(got, want, "{uri}");
    }
}

#[tokio::test]
async fn detroit_urbanicity_bar_label() {
    let (app, _) = fixture_app();
    let (_, body) = get_json(
        &app,
        "/api/bars?community=detroit-mi&metric=community_attachment&years=all",
    )
    .await;
    let bars = body["bars"].as_array().unwrap();
    assert_eq!(bars.len(), 4);
    assert_eq!(
        bars[1]["label"],
        "Very high urbanicity-very large population"
    );
    assert_eq!(bars[2]["label"], "Rust Belt");
    // display names resolve too
    let (status, by_name) = get_json(
        &app,
        "/api/bars?community=Detroit,%20MI&metric=community_attachment",
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(by_name, body);
}

#[tokio::test]
async fn communities_and_health() {
    let (app, snap) = fixture_app();
    let (_, communities) = get_json(&app, "/api/communities").await;
    assert_eq!(communities.as_array().unwrap().len(), 26);
    let (_, health) = get_json(&app, "/api/health").await;
    assert_eq!(health["rows"], snap.total_respondents());
    assert_eq!(health["provenance"]["accepted"], 950);
    let (_, corr) = get_json(&app, "/api/correlations?level=all&years=all").await;
    assert_eq!(corr["profile"]["entries"].as_array().unwrap().len(), 10);
}

#[tokio::test]
async fn error_statuses_and_bodies() {
    let spec = FixtureSpec {
        communities: Some(vec![0, 1, 2]),
        ..FixtureSpec::default()
    };
    let (app, _) = app_for(&fixture_table(&spec), &RouterOptions::default());
    let schemas = Schemas::load();
    let cases = [
        ("/api/nope", StatusCode::NOT_FOUND, "not_found"),
        ("/api/map", StatusCode::BAD_REQUEST, "missing_parameter"),
        (
            "/api/map?metric=happiness",
            StatusCode::BAD_REQUEST,
            "unknown_metric",
        ),
        (
            "/api/map?metric=economy&years=2011",
            StatusCode::BAD_REQUEST,
            "unknown_year",
        ),
        (
            "/api/map?metric=economy&colour=red",
            StatusCode::BAD_REQUEST,
            "bad_parameter",
        ),
        (
            "/api/bars?community=atlantis&metric=economy",
            StatusCode::BAD_REQUEST,
            "unknown_community",
        ),
        (
            "/api/correlations?level=galaxy",
            StatusCode::BAD_REQUEST,
            "unknown_level",
        ),
        (
            "/api/correlations?level=region",
            StatusCode::BAD_REQUEST,
            "missing_parameter",
        ),
        (
            "/api/correlations?level=region&id=midwest",
            StatusCode::BAD_REQUEST,
            "unknown_region",
        ),
        (
            "/api/correlations?level=urbanicity&id=rural",
            StatusCode::BAD_REQUEST,
            "unknown_urbanicity",
        ),
        (
            "/api/bin2d?x=economy&y=safety&nx=0",
            StatusCode::BAD_REQUEST,
            "bad_parameter",
        ),
        (
            "/api/bin2d?x=economy&y=safety&nx=ten",
            StatusCode::BAD_REQUEST,
            "bad_parameter",
        ),
        (
            "/api/density?metric=economy&points=5",
            StatusCode::BAD_REQUEST,
            "bad_parameter",
        ),
        (
            "/api/series?metric=economy&communities=all&years=2009",
            StatusCode::BAD_REQUEST,
            "bad_parameter",
        ),
        (
            "/api/series?metric=economy&communities=,",
            StatusCode::BAD_REQUEST,
            "bad_parameter",
        ),
        (
            "/api/bin2d?x=economy&y=safety&level=community&id=macon-ga",
            StatusCode::UNPROCESSABLE_ENTITY,
            "empty_selection",
        ),
        (
            "/api/density?metric=economy&level=community&id=macon-ga",
            StatusCode::UNPROCESSABLE_ENTITY,
            "degenerate_sample",
        ),
    ];
    for (uri, status, code) in cases {
        let (got, body) = get_json(&app, uri).await;
        assert_eq!(got, status, "{uri}: {body}");
        assert_eq!(body["code"], code, "{uri}: {body}");
        schemas.check("error", &body).unwrap();
    }
}

#[tokio::test]
async fn cors_headers() {
    let table = fixture_table(&FixtureSpec::new(1, 200));
    let (open, _) = app_for(&table, &RouterOptions::default());
    let req = || {
        Request::get("/api/health")
            .header("origin", "http://example.org")
            .body(Body::empty())
            .unwrap()
    };
    let r = open.clone().oneshot(req()).await.unwrap();
    assert_eq!(r.headers()["access-control-allow-origin"], "*");

    let options = RouterOptions {
        cors_origins: vec!["http://localhost:5173".into()],
        ..Default::default()
    };
    let (closed, _) = app_for(&table, &options);
    let r = closed.clone().oneshot(req()).await.unwrap();
    assert!(r.headers().get("access-control-allow-origin").is_none());
    let r = closed
        .oneshot(
            Request::get("/api/health")
                .header("origin", "http://localhost:5173")
                .body(Body::empty())
                .unwrap(),
        )
        .await
        .unwrap();
    assert_eq!(
        r.headers()["access-control-allow-origin"],
        "http://localhost:5173"
    );
}

#[tokio::test]
async fn static_assets_beside_the_api() {
    let dir = std::env::temp_dir().join(format!("attache-assets-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("index.html"), "<h1>dashboard</h1>").unwrap();
    let options = RouterOptions {
        assets: Some(dir.clone()),
        ..Default::default()
    };
    let (app, _) = app_for(&fixture_table(&FixtureSpec::new(1, 200)), &options);
    let (status, body) = get_raw(&app, "/index.html").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, b"<h1>dashboard</h1>");
    let (status, body) = get_json(&app, "/api/missing").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["message"], "no route for `/api/missing`");
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn registry_default_matches_communities_endpoint_order() {
    let registry = CommunityRegistry::default_registry();
    assert_eq!(registry.communities().len(), 26);
}
