//! The v1 wire schema shared by every external adapter, plus the transports:
//! JSON over HTTP POST and line-delimited JSON over a child process's stdio.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: &str = "v1";

pub const PREDICT_PROBA_PATH: &str = "/predict_proba";
pub const FILL_MASK_PATH: &str = "/fill_mask";
pub const SIMILARITY_PATH: &str = "/similarity";
pub const TAG_PATH: &str = "/tag";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictRequest {
    pub schema: String,
    pub texts: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictResponse {
    pub schema: String,
    pub probabilities: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FillMaskRequest {
    pub schema: String,
    pub text: String,
    pub top_k: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FillMaskResponse {
    pub schema: String,
    pub candidates: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimilarityRequest {
    pub schema: String,
    pub original: String,
    pub modified: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimilarityResponse {
    pub schema: String,
    pub score: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TagRequest {
    pub schema: String,
    pub text: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TagResponse {
    pub schema: String,
    pub tokens: Vec<String>,
    pub tags: Vec<String>,
}

/// Reject responses that do not carry the expected schema version.
pub fn check_schema(schema: &str) -> Result<(), String> {
    if schema == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(format!(
            "schema mismatch: expected \"{SCHEMA_VERSION}\", got \"{schema}\""
        ))
    }
}

/// Blocking JSON-over-HTTP client used by all HTTP adapters.
#[derive(Debug, Clone)]
pub struct HttpClient {
    agent: ureq::Agent,
    base_url: String,
}

impl HttpClient {
    pub fn new(base_url: &str, timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build();
        HttpClient {
            agent: ureq::Agent::new_with_config(config),
            base_url: base_url.trim_end_matches('/').to_string(),
        }
    }

    pub fn post<Req: Serialize, Resp: DeserializeOwned>(
        &self,
        path: &str,
        request: &Req,
    ) -> Result<Resp, String> {
        let url = format!("{}{}", self.base_url, path);
        let mut response = self
            .agent
            .post(&url)
            .send_json(request)
            .map_err(|e| format!("POST {url}: {e}"))?;
        response
            .body_mut()
            .read_json::<Resp>()
            .map_err(|e| format!("POST {url}: invalid response body: {e}"))
    }
}

/// Line-delimited JSON transport over a child process's stdin/stdout.
/// Requests are serialized; one request line yields one response line.
#[derive(Debug)]
pub struct StdioTransport {
    child: Mutex<StdioChild>,
    command: Vec<String>,
}

#[derive(Debug)]
struct StdioChild {
    process: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl StdioTransport {
    pub fn spawn(command: &[String]) -> Result<Self, String> {
        if command.is_empty() {
            return Err("stdio transport needs a non-empty command".to_string());
        }
        let mut process = Command::new(&command[0])
            .args(&command[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| format!("failed to spawn {:?}: {e}", command[0]))?;
        let stdin = process.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(process.stdout.take().expect("piped stdout"));
        Ok(StdioTransport {
            child: Mutex::new(StdioChild {
                process,
                stdin,
                stdout,
            }),
            command: command.to_vec(),
        })
    }

    pub fn round_trip<Req: Serialize, Resp: DeserializeOwned>(
        &self,
        request: &Req,
    ) -> Result<Resp, String> {
        let mut child = self.child.lock().expect("stdio transport poisoned");
        let line = serde_json::to_string(request).map_err(|e| e.to_string())?;
        child
            .stdin
            .write_all(line.as_bytes())
            .and_then(|_| child.stdin.write_all(b"\n"))
            .and_then(|_| child.stdin.flush())
            .map_err(|e| format!("stdio write to {:?}: {e}", self.command[0]))?;
        let mut response = String::new();
        let read = child
            .stdout
            .read_line(&mut response)
            .map_err(|e| format!("stdio read from {:?}: {e}", self.command[0]))?;
        if read == 0 {
            return Err(format!("stdio child {:?} closed its stdout", self.command[0]));
        }
        serde_json::from_str(response.trim_end())
            .map_err(|e| format!("stdio child {:?}: invalid response: {e}", self.command[0]))
    }
}

impl Drop for StdioTransport {
    fn drop(&mut self) {
        if let Ok(mut child) = self.child.lock() {
            let _ = child.process.kill();
            let _ = child.process.wait();
        }
    }
}

/// Handler result: either a JSON body or an HTTP error status plus message.
pub type HandlerResult = Result<String, (u16, String)>;

/// Request handler shared by the HTTP stub server and the stdio stub loop.
/// Receives the request path (empty for stdio) and the raw JSON body.
pub type Handler = Arc<dyn Fn(&str, &str) -> HandlerResult + Send + Sync>;

/// A minimal HTTP/1.1 server for the bundled stubs: POST with a
/// Content-Length body, one response per connection.
pub struct StubServer {
    addr: std::net::SocketAddr,
    shutdown: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl StubServer {
    /// Bind `addr` (use port 0 for an OS-assigned port) and serve `handler`
    /// on a background thread until dropped.
    pub fn spawn(addr: &str, handler: Handler) -> std::io::Result<StubServer> {
        let listener = TcpListener::bind(addr)?;
        let local = listener.local_addr()?;
        let shutdown = Arc::new(AtomicBool::new(false));
        let flag = shutdown.clone();
        let handle = std::thread::spawn(move || serve_loop(listener, handler, Some(flag)));
        Ok(StubServer {
            addr: local,
            shutdown,
            handle: Some(handle),
        })
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }
}

impl Drop for StubServer {
    fn drop(&mut self) {
        self.shutdown.store(true, Ordering::SeqCst);
        // Unblock the accept loop.
        let _ = TcpStream::connect(self.addr);
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}

/// Accept loop; runs until the shutdown flag is set (forever when `None`).
pub fn serve_loop(listener: TcpListener, handler: Handler, shutdown: Option<Arc<AtomicBool>>) {
    for stream in listener.incoming() {
        if shutdown
            .as_ref()
            .is_some_and(|flag| flag.load(Ordering::SeqCst))
        {
            break;
        }
        let Ok(stream) = stream else { continue };
        let handler = handler.clone();
        std::thread::spawn(move || {
            let _ = handle_connection(stream, &handler);
        });
    }
}

fn handle_connection(mut stream: TcpStream, handler: &Handler) -> std::io::Result<()> {
    stream.set_read_timeout(Some(Duration::from_secs(30)))?;
    let mut reader = BufReader::new(stream.try_clone()?);

    let mut request_line = String::new();
    if reader.read_line(&mut request_line)? == 0 {
        return Ok(());
    }
    let mut parts = request_line.split_whitespace();
    let method = parts.next().unwrap_or("").to_string();
    let path = parts.next().unwrap_or("/").to_string();

    let mut content_length = 0usize;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line)? == 0 {
            break;
        }
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some(value) = line
            .to_ascii_lowercase()
            .strip_prefix("content-length:")
            .map(str::trim)
            .map(String::from)
        {
            content_length = value.parse().unwrap_or(0);
        }
    }

    let mut body = vec![0u8; content_length];
    reader.read_exact(&mut body)?;
    let body = String::from_utf8_lossy(&body).into_owned();

    let (status, reason, payload) = if method != "POST" {
        (
            405,
            "Method Not Allowed",
            "{\"error\":\"only POST is supported\"}".to_string(),
        )
    } else {
        match handler(&path, &body) {
            Ok(json) => (200, "OK", json),
            Err((status, message)) => {
                let reason = match status {
                    400 => "Bad Request",
                    404 => "Not Found",
                    _ => "Internal Server Error",
                };
                (
                    status,
                    reason,
                    serde_json::json!({ "error": message }).to_string(),
                )
            }
        }
    };

    write!(
        stream,
        "HTTP/1.1 {status} {reason}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
        payload.len()
    )?;
    stream.flush()
}

/// Serve the stdio protocol: one JSON request per stdin line, one JSON
/// response per stdout line. Used by `beamstrike stub ... --stdio`.
pub fn serve_stdio(handler: Handler) -> std::io::Result<()> {
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    for line in stdin.lock().lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let response = match handler("", &line) {
            Ok(json) => json,
            Err((_, message)) => serde_json::json!({ "error": message }).to_string(),
        };
        let mut out = stdout.lock();
        out.write_all(response.as_bytes())?;
        out.write_all(b"\n")?;
        out.flush()?;
    }
    Ok(())
}
