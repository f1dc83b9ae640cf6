use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::State;
use axum::http::{HeaderMap, StatusCode};
use axum::routing::post;
use axum::{Json, Router};
use serde_json::{json, Value};
use subjaug::gateway::{ChatRequest, Gateway, GatewayConfig, GatewayError};

type Seen = Arc<Mutex<Vec<(Option<String>, Value)>>>;

#[derive(Clone, Default)]
struct Fake {
    calls: Arc<AtomicUsize>,
    /// Status codes to return before the first success.
    failures: Arc<Vec<u16>>,
    seen: Seen,
}

async fn chat(State(fake): State<Fake>, headers: HeaderMap, Json(body): Json<Value>) -> (StatusCode, Json<Value>) {
    let n = fake.calls.fetch_add(1, Ordering::SeqCst);
    let auth = headers.get("authorization").and_then(|v| v.to_str().ok()).map(String::from);
    fake.seen.lock().unwrap().push((auth, body));
    if let Some(code) = fake.failures.get(n) {
        return (StatusCode::from_u16(*code).unwrap(), Json(json!({"error": {"message": "nope"}})));
    }
    (
        StatusCode::OK,
        Json(json!({"choices": [{"index": 0, "message": {"role": "assistant", "content": "  \"A   rewritten sentence.\" \n"}}]})),
    )
}

async fn serve(failures: Vec<u16>) -> (String, Fake) {
    let fake = Fake {
        failures: Arc::new(failures),
        ..Fake::default()
    };
    let app = Router::new().route("/v1/chat/completions", post(chat)).with_state(fake.clone());
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    (format!("http://{addr}/v1"), fake)
}

fn gateway(base_url: String, key_env: &str) -> Gateway {
    std::env::set_var(key_env, "sk-test");
    Gateway::live(GatewayConfig {
        base_url,
        api_key_env_name: key_env.into(),
        max_in_flight: 2,
        max_retries: 3,
        initial_backoff_ms: 1,
        request_timeout_secs: 5,
    })
    .unwrap()
}

fn request() -> ChatRequest {
    ChatRequest {
        model_name: "gpt-4o".into(),
        system_text: Some("be terse".into()),
        user_text: "Rewrite this.".into(),
        temperature: 0.0,
        max_output_tokens: 64,
    }
}

#[tokio::test]
async fn wire_format_and_normalized_reply() {
    let (url, fake) = serve(vec![]).await;
    let resp = gateway(url, "SUBJAUG_TEST_KEY_WIRE").complete(&request()).await.unwrap();
    assert_eq!(resp.text, "A rewritten sentence.");
    assert_eq!(resp.request_fingerprint, request().fingerprint());

    let seen = fake.seen.lock().unwrap();
    let (auth, body) = &seen[0];
    assert_eq!(auth.as_deref(), Some("Bearer sk-test"));
    assert_eq!(
        body,
        &json!({
            "model": "gpt-4o",
            "messages": [
                {"role": "system", "content": "be terse"},
                {"role": "user", "content": "Rewrite this."}
            ],
            "temperature": 0.0,
            "max_tokens": 64
        })
    );
}

#[tokio::test]
async fn retries_rate_limits_then_succeeds() {
    let (url, fake) = serve(vec![429, 503]).await;
    let resp = gateway(url, "SUBJAUG_TEST_KEY_RETRY").complete(&request()).await.unwrap();
    assert_eq!(resp.text, "A rewritten sentence.");
    assert_eq!(fake.calls.load(Ordering::SeqCst), 3);
}

#[tokio::test]
async fn client_error_is_not_retried() {
    let (url, fake) = serve(vec![400]).await;
    let err = gateway(url, "SUBJAUG_TEST_KEY_400").complete(&request()).await.unwrap_err();
    assert!(matches!(err, GatewayError::Http { status: 400, .. }), "{err:?}");
    assert_eq!(fake.calls.load(Ordering::SeqCst), 1);
}

#[tokio::test]
async fn gives_up_after_max_retries() {
    let (url, fake) = serve(vec![500; 10]).await;
    let err = gateway(url, "SUBJAUG_TEST_KEY_500").complete(&request()).await.unwrap_err();
    assert!(matches!(err, GatewayError::Exhausted { attempts: 4, .. }), "{err:?}");
    assert_eq!(fake.calls.load(Ordering::SeqCst), 4);
}

#[tokio::test]
async fn unreachable_host_is_a_transport_failure() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", listener.local_addr().unwrap());
    drop(listener);
    let err = gateway(url, "SUBJAUG_TEST_KEY_DOWN").complete(&request()).await.unwrap_err();
    assert!(matches!(err, GatewayError::Exhausted { .. }), "{err:?}");
}

#[test]
fn live_gateway_needs_key() {
    let err = Gateway::live(GatewayConfig {
        api_key_env_name: "SUBJAUG_TEST_KEY_NEVER_SET".into(),
        ..GatewayConfig::default()
    })
    .unwrap_err();
    assert!(matches!(err, GatewayError::MissingApiKey(_)));
}
