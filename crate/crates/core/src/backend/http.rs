//! Client for the segmentation server protocol.
//!
//! `POST /v1/auto_masks` with `{"image_path"}` or `{"image_b64png"}` answers
//! a mask set; `POST /v1/segment` additionally carries `"box": [x0, y0, x1, y1]`
//! and `"point": [x, y]` and answers `{"height", "width", "counts"}`. Status
//! 400 means a malformed body, 404 an unknown image, 503 a model that is not
//! loaded.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use base64::Engine;
use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use super::{check_mask_dims, ImageRef, SegmenterBackend};
use crate::error::{Error, Result};
use crate::io::{BBox, MaskRle, MaskSet, Point};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ImageTransport {
    /// Send the image path; the server reads it from its own filesystem.
    #[default]
    Path,
    /// Send the image inline as base64-encoded PNG.
    Base64Png,
}

#[derive(Debug, Clone)]
pub struct HttpConfig {
    pub max_in_flight: usize,
    pub timeout: Duration,
    pub transport: ImageTransport,
}

impl Default for HttpConfig {
    fn default() -> Self {
        Self { max_in_flight: 4, timeout: Duration::from_secs(30), transport: ImageTransport::Path }
    }
}

pub struct HttpBackend {
    base: String,
    client: Client,
    transport: ImageTransport,
    slots: Slots,
}

struct Slots {
    used: Mutex<usize>,
    freed: Condvar,
    limit: usize,
}

struct SlotGuard<'a>(&'a Slots);

impl Slots {
    fn acquire(&self) -> SlotGuard<'_> {
        let mut used = self.used.lock().unwrap();
        while *used >= self.limit {
            used = self.freed.wait(used).unwrap();
        }
        *used += 1;
        SlotGuard(self)
    }
}

impl Drop for SlotGuard<'_> {
    fn drop(&mut self) {
        *self.0.used.lock().unwrap() -= 1;
        self.0.freed.notify_one();
    }
}

impl HttpBackend {
    pub fn new(base_url: &str, cfg: HttpConfig) -> Result<Self> {
        let client =
            Client::builder().timeout(cfg.timeout).build().map_err(|e| Error::BackendUnavailable(e.to_string()))?;
        Ok(Self {
            base: base_url.trim_end_matches('/').to_string(),
            client,
            transport: cfg.transport,
            slots: Slots { used: Mutex::new(0), freed: Condvar::new(), limit: cfg.max_in_flight.max(1) },
        })
    }

    fn image_field(&self, image: &ImageRef) -> Result<(&'static str, Value)> {
        match self.transport {
            ImageTransport::Path => Ok(("image_path", Value::String(image.path.display().to_string()))),
            ImageTransport::Base64Png => {
                let bytes =
                    std::fs::read(&image.path).map_err(|_| Error::ImageNotFound(image.path.display().to_string()))?;
                let png = if bytes.starts_with(b"\x89PNG\r\n\x1a\n") {
                    bytes
                } else {
                    let mut out = std::io::Cursor::new(Vec::new());
                    image::load_from_memory(&bytes)?.write_to(&mut out, image::ImageFormat::Png)?;
                    out.into_inner()
                };
                Ok(("image_b64png", Value::String(base64::engine::general_purpose::STANDARD.encode(png))))
            }
        }
    }

    fn post<T: DeserializeOwned>(&self, route: &str, body: Value) -> Result<T> {
        let _slot = self.slots.acquire();
        let url = format!("{}{route}", self.base);
        let resp =
            self.client.post(&url).json(&body).send().map_err(|e| Error::BackendUnavailable(format!("{url}: {e}")))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| Error::BackendUnavailable(format!("{url}: {e}")))?;
        match status {
            StatusCode::OK => {
                serde_json::from_str(&text).map_err(|e| Error::Protocol(format!("{url}: undecodable response: {e}")))
            }
            StatusCode::NOT_FOUND => Err(Error::ImageNotFound(text)),
            StatusCode::SERVICE_UNAVAILABLE => Err(Error::BackendUnavailable(text)),
            StatusCode::BAD_REQUEST => Err(Error::Protocol(format!("{url}: rejected request: {text}"))),
            other => Err(Error::Protocol(format!("{url}: unexpected status {other}: {text}"))),
        }
    }
}

impl SegmenterBackend for HttpBackend {
    fn supports_auto(&self) -> bool {
        true
    }

    fn supports_prompt(&self) -> bool {
        true
    }

    fn auto_masks(&self, image: &ImageRef) -> Result<MaskSet> {
        let (key, value) = self.image_field(image)?;
        let set: MaskSet = self.post("/v1/auto_masks", json!({ key: value }))?;
        if set.dims() != image.dims() {
            return Err(Error::dims(image.dims(), set.dims()));
        }
        set.validate()?;
        Ok(set)
    }

    fn prompt_segment(&self, image: &ImageRef, bbox: BBox, point: Point) -> Result<MaskRle> {
        let (key, value) = self.image_field(image)?;
        let body = json!({
            key: value,
            "box": [bbox.x0, bbox.y0, bbox.x1, bbox.y1],
            "point": [point.x, point.y],
        });
        let rle: MaskRle = self.post("/v1/segment", body)?;
        check_mask_dims(image, &rle)?;
        if rle.area() == 0 {
            return Err(Error::EmptyResult);
        }
        Ok(rle)
    }
}
