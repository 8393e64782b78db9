#![allow(dead_code)]

use std::path::{Path, PathBuf};

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use axum::Router;
use serde_json::Value;
use tower::ServiceExt;

use attache_core::fixture::{generate_csv, FixtureSpec};
use attache_core::ingestion::{build_snapshot, parse_survey_file, ResponseTable};
use attache_core::AnalyticsSnapshot;
use attache_service::{router, AppState, RouterOptions};

pub fn fixture_table(spec: &FixtureSpec) -> ResponseTable {
    let survey = generate_csv(spec);
    parse_survey_file(survey.csv.as_bytes(), &survey.mapping, &survey.registry)
        .expect("fixture ingests")
}

pub fn app_for(table: &ResponseTable, options: &RouterOptions) -> (Router, AnalyticsSnapshot) {
    let snapshot = build_snapshot(table);
    let state = AppState::new(snapshot.clone(), table.provenance().clone());
    (router(state, options), snapshot)
}

pub fn fixture_app() -> (Router, AnalyticsSnapshot) {
    app_for(
        &fixture_table(&FixtureSpec::default()),
        &RouterOptions::default(),
    )
}

pub async fn get_raw(app: &Router, uri: &str) -> (StatusCode, Vec<u8>) {
    let response = app
        .clone()
        .oneshot(Request::get(uri).body(Body::empty()).unwrap())
        .await
        .unwrap();
    let status = response.status();
    let body = to_bytes(response.into_body(), usize::MAX).await.unwrap();
    (status, body.to_vec())
}

pub async fn get_json(app: &Router, uri: &str) -> (StatusCode, Value) {
    let (status, body) = get_raw(app, uri).await;
    let value =
        serde_json::from_slice(&body).unwrap_or_else(|e| panic!("{uri}: body is not JSON ({e})"));
    (status, value)
}

pub fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schema")
}

pub struct Schemas(Vec<(String, jsonschema::Validator)>);

impl Schemas {
    pub fn load() -> Self {
        let mut out = Vec::new();
        for entry in std::fs::read_dir(schema_dir()).expect("schema directory") {
            let path = entry.unwrap().path();
            let name = path.file_stem().unwrap().to_string_lossy().to_string();
            let schema: Value =
                serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
            let validator =
                jsonschema::validator_for(&schema).unwrap_or_else(|e| panic!("{name}: {e}"));
            out.push((name, validator));
        }
        Schemas(out)
    }

    pub fn names(&self) -> Vec<&str> {
        self.0.iter().map(|(n, _)| n.as_str()).collect()
    }

    /// Validate `body` against the schema named after the endpoint (or
    /// `error`); returns the validation messages.
    pub fn check(&self, name: &str, body: &Value) -> Result<(), String> {
        let (_, v) = self
            .0
            .iter()
            .find(|(n, _)| n == name)
            .unwrap_or_else(|| panic!("no schema named {name}"));
        let errors: Vec<String> = v
            .iter_errors(body)
            .map(|e| format!("{} at {}", e, e.instance_path))
            .collect();
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors.join("; "))
        }
    }
}

/// Endpoint name for an `/api/...` URI.
pub fn endpoint(uri: &str) -> &str {
    uri.trim_start_matches("/api/").split('?').next().unwrap()
}

/// A sweep of requests covering every endpoint and parameter shape.
pub fn request_sweep() -> Vec<String> {
    let mut out = vec!["/api/health".to_string(), "/api/communities".to_string()];
    let years = ["all", "2008", "2009", "2010"];
    let metrics = [
        "community_attachment",
        "social_offerings",
        "openness",
        "aesthetics",
        "education",
        "basic_services",
        "leadership",
        "economy",
        "safety",
        "social_capital",
        "civic_involvement",
    ];
    for y in years {
        out.push(format!("/api/parallel?years={y}"));
        for m in metrics {
            out.push(format!("/api/map?metric={m}&years={y}"));
            out.push(format!("/api/dotplot?metric={m}&years={y}"));
            out.push(format!(
                "/api/bars?community=detroit-mi&metric={m}&years={y}"
            ));
            out.push(format!("/api/density?metric={m}&years={y}&points=64"));
        }
        for (level, id) in [
            ("all", ""),
            ("region", "rust_belt"),
            ("region", "great_plains"),
            ("community", "st-paul-mn"),
        ] {
            out.push(format!("/api/correlations?level={level}&id={id}&years={y}"));
            out.push(format!("/api/bin2d?x=openness&y=community_attachment&level={level}&id={id}&years={y}&nx=10&ny=10"));
        }
        out.push(format!(
            "/api/correlations?level=urbanicity&id=Very%20high%20urbanicity-medium%20population&years={y}"
        ));
    }
    for m in metrics {
        out.push(format!("/api/series?metric={m}&communities=all&years=each"));
    }
    out.push("/api/series?metric=economy&communities=detroit-mi,state-college-pa".to_string());
    out
}
