use std::sync::atomic::{AtomicU64, Ordering};

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use reqwest::blocking::Client;
use serde::{Deserialize, Serialize};

use super::{Frame, RolloutRequest, WorldModel, WorldModelError};
use crate::geometry::{CameraPose, Intrinsics};
use crate::transport::{self, ConcurrencyLimit, HttpFault, HttpSettings};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct WirePose {
    #[serde(rename = "R")]
    r: Vec<f64>,
    t: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct WireRequest {
    protocol: u32,
    reference: String,
    intrinsics: Intrinsics,
    pitch_deg: f64,
    poses: Vec<WirePose>,
}

#[derive(Deserialize)]
struct WireResponse {
    #[serde(default)]
    protocol: Option<u32>,
    frames: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
pub struct HealthStatus {
    pub status: String,
    pub backend: String,
}

/// Canonical request body for `POST /v1/rollout`.
pub fn encode_rollout_request(req: &RolloutRequest) -> Vec<u8> {
    let body = WireRequest {
        protocol: PROTOCOL_VERSION,
        reference: BASE64.encode(req.reference.to_png()),
        intrinsics: req.intrinsics,
        pitch_deg: req.pitch_deg,
        poses: req
            .poses
            .iter()
            .map(|p| {
                let (r, t) = p.to_row_major();
                WirePose {
                    r: r.to_vec(),
                    t: t.to_vec(),
                }
            })
            .collect(),
    };
    serde_json::to_vec(&body).expect("request serializes")
}

/// Decode a request body back into its parts; used by fixture tests and
/// mock servers.
pub fn decode_rollout_request(bytes: &[u8]) -> Result<RolloutRequest, WorldModelError> {
    let wire: WireRequest = serde_json::from_slice(bytes)
        .map_err(|e| WorldModelError::Protocol(format!("request: {e}")))?;
    if wire.protocol != PROTOCOL_VERSION {
        return Err(WorldModelError::ProtocolVersion {
            expected: PROTOCOL_VERSION,
            got: wire.protocol,
        });
    }
    let png = BASE64
        .decode(&wire.reference)
        .map_err(|e| WorldModelError::Protocol(format!("reference base64: {e}")))?;
    let poses = wire
        .poses
        .iter()
        .map(|p| {
            CameraPose::from_row_major(&p.r, &p.t)
                .map_err(|e| WorldModelError::Validation(format!("pose: {e}")))
        })
        .collect::<Result<_, _>>()?;
    Ok(RolloutRequest {
        reference: std::sync::Arc::new(Frame::from_png(&png)?),
        poses,
        intrinsics: wire.intrinsics,
        pitch_deg: wire.pitch_deg,
    })
}

/// Decode `{frames: [...]}` and check count and dimensions.
pub fn decode_rollout_response(
    bytes: &[u8],
    expected_frames: usize,
    k: &Intrinsics,
) -> Result<Vec<Frame>, WorldModelError> {
    if let Some((code, message)) = transport::error_body(bytes) {
        return Err(WorldModelError::Server { code, message });
    }
    let wire: WireResponse = serde_json::from_slice(bytes)
        .map_err(|e| WorldModelError::Protocol(format!("response: {e}")))?;
    if let Some(v) = wire.protocol {
        if v != PROTOCOL_VERSION {
            return Err(WorldModelError::ProtocolVersion {
                expected: PROTOCOL_VERSION,
                got: v,
            });
        }
    }
    if wire.frames.len() != expected_frames {
        return Err(WorldModelError::FrameCount {
            expected: expected_frames,
            got: wire.frames.len(),
        });
    }
    wire.frames
        .iter()
        .map(|b64| {
            let png = BASE64
                .decode(b64)
                .map_err(|e| WorldModelError::Protocol(format!("frame base64: {e}")))?;
            let frame = Frame::from_png(&png)?;
            if frame.width() != k.width || frame.height() != k.height {
                return Err(WorldModelError::Dimension(format!(
                    "frame is {}x{}, expected {}x{}",
                    frame.width(),
                    frame.height(),
                    k.width,
                    k.height
                )));
            }
            Ok(frame)
        })
        .collect()
}

/// Client for a rollout service speaking the JSON wire protocol.
pub struct RemoteWorldModel {
    endpoint: String,
    client: Client,
    limit: ConcurrencyLimit,
    max_len: usize,
    next_id: AtomicU64,
}

impl RemoteWorldModel {
    pub fn new(endpoint: impl Into<String>, settings: HttpSettings) -> Self {
        RemoteWorldModel {
            endpoint: endpoint.into(),
            client: transport::build_client(&settings),
            limit: ConcurrencyLimit::new(settings.max_in_flight),
            max_len: 8,
            next_id: AtomicU64::new(1),
        }
    }

    pub fn with_max_len(mut self, max_len: usize) -> Self {
        self.max_len = max_len;
        self
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    pub fn health(&self) -> Result<HealthStatus, WorldModelError> {
        let url = transport::join_url(&self.endpoint, "/v1/health");
        let bytes = transport::get(&self.client, &url).map_err(map_fault)?;
        serde_json::from_slice(&bytes).map_err(|e| WorldModelError::Protocol(format!("health: {e}")))
    }
}

fn map_fault(f: HttpFault) -> WorldModelError {
    match f {
        HttpFault::Transport(m) => WorldModelError::Transport(m),
        HttpFault::Status(status, body) => match transport::error_body(&body) {
            Some((code, message)) => WorldModelError::Server { code, message },
            None => WorldModelError::Protocol(format!("http status {status}")),
        },
    }
}

impl WorldModel for RemoteWorldModel {
    fn name(&self) -> String {
        format!("remote:{}", self.endpoint)
    }

    fn rollout(&self, req: &RolloutRequest) -> Result<Vec<Frame>, WorldModelError> {
        req.validate(self.max_len)?;
        let body = encode_rollout_request(req);
        let id = self.next_id.fetch_add(1, Ordering::Relaxed).to_string();
        let url = transport::join_url(&self.endpoint, "/v1/rollout");
        let bytes = {
            let _permit = self.limit.acquire();
            transport::post_json(&self.client, &url, body, None, Some(&id)).map_err(map_fault)?
        };
        decode_rollout_response(&bytes, req.poses.len(), &req.intrinsics)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::yaw_rotation;
    use std::sync::Arc;

    fn request() -> RolloutRequest {
        let k = Intrinsics::from_fov(4, 4, 60.0).unwrap();
        RolloutRequest {
            reference: Arc::new(Frame::filled(4, 4, [10, 20, 30])),
            poses: vec![CameraPose::identity(), yaw_rotation(9.0)],
            intrinsics: k,
            pitch_deg: 0.0,
        }
    }

    #[test]
    fn request_round_trips() {
        let req = request();
        let bytes = encode_rollout_request(&req);
        let text = std::str::from_utf8(&bytes).unwrap();
        assert!(text.starts_with(r#"{"protocol":1,"reference":""#));
        assert!(text.contains(r#""intrinsics":{"fx":"#));
        assert!(text.contains(r#""w":4,"h":4"#));
        let back = decode_rollout_request(&bytes).unwrap();
        assert_eq!(back.poses, req.poses);
        assert_eq!(*back.reference, *req.reference);
    }

    #[test]
    fn response_checks() {
        let k = request().intrinsics;
        let png = BASE64.encode(Frame::filled(4, 4, [1, 2, 3]).to_png());
        let ok = format!(r#"{{"frames":["{png}","{png}"]}}"#);
        assert_eq!(decode_rollout_response(ok.as_bytes(), 2, &k).unwrap().len(), 2);
        assert!(matches!(
            decode_rollout_response(ok.as_bytes(), 3, &k),
            Err(WorldModelError::FrameCount { expected: 3, got: 2 })
        ));
        let wrong_version = format!(r#"{{"protocol":2,"frames":["{png}"]}}"#);
        assert!(matches!(
            decode_rollout_response(wrong_version.as_bytes(), 1, &k),
            Err(WorldModelError::ProtocolVersion { got: 2, .. })
        ));
        let small = BASE64.encode(Frame::filled(2, 2, [1, 2, 3]).to_png());
        let bad_dims = format!(r#"{{"frames":["{small}"]}}"#);
        assert!(matches!(
            decode_rollout_response(bad_dims.as_bytes(), 1, &k),
            Err(WorldModelError::Dimension(_))
        ));
        let err = br#"{"error":{"code":"bad_pose","message":"x"}}"#;
        assert!(matches!(
            decode_rollout_response(err, 1, &k),
            Err(WorldModelError::Server { .. })
        ));
    }
}
