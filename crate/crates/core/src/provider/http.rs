//! HTTP adapters for the supported commercial and open translation services.
//!
//! Each service differs only in how the request is shaped and where the
//! translation sits in the JSON reply, so one [`HttpTranslator`] covers all
//! of them via [`Service`]. Endpoints can be overridden (for self-hosted
//! LibreTranslate or regional endpoints). API keys come from
//! `WOKIE_<PROVIDERID>_API_KEY`.

use std::time::Duration;

use reqwest::blocking::{Client, RequestBuilder, Response};
use reqwest::StatusCode;
use serde_json::{json, Value};

use super::{LanguageSupport, ProviderDescriptor, ProviderError, ProviderErrorKind, Translator, DEFAULT_RATE_LIMIT};
use crate::lang::LanguageTag;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(15);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Service {
    Lingvanex,
    Google,
    ModernMt,
    Microsoft,
    Yandex,
    Argos,
    Reverso,
    Pons,
}

impl Service {
    pub const ALL: [Service; 8] = [
        Service::Lingvanex,
        Service::Google,
        Service::ModernMt,
        Service::Microsoft,
        Service::Yandex,
        Service::Argos,
        Service::Reverso,
        Service::Pons,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Service::Lingvanex => "lingvanex",
            Service::Google => "google",
            Service::ModernMt => "modernmt",
            Service::Microsoft => "microsoft",
            Service::Yandex => "yandex",
            Service::Argos => "argos",
            Service::Reverso => "reverso",
            Service::Pons => "pons",
        }
    }

    pub fn from_id(id: &str) -> Option<Service> {
        Self::ALL.into_iter().find(|s| s.id() == id)
    }

    pub fn default_endpoint(self) -> &'static str {
        match self {
            Service::Lingvanex => "https://api-b2b.backenster.com/b1/api/v3/translate",
            Service::Google => "https://translation.googleapis.com/language/translate/v2",
            Service::ModernMt => "https://api.modernmt.com/translate",
            Service::Microsoft => "https://api.cognitive.microsofttranslator.com/translate",
            Service::Yandex => "https://translate.api.cloud.yandex.net/translate/v2/translate",
            // LibreTranslate front end for Argos; usually self-hosted
            Service::Argos => "http://localhost:5000/translate",
            Service::Reverso => "https://api.reverso.net/translate/v1/translation",
            Service::Pons => "https://api.pons.com/v1/dictionary",
        }
    }

    pub fn requires_key(self) -> bool {
        !matches!(self, Service::Argos | Service::Reverso)
    }

    pub fn api_key_env(self) -> String {
        format!("WOKIE_{}_API_KEY", self.id().to_ascii_uppercase())
    }

    pub fn support(self) -> LanguageSupport {
        match self {
            Service::Pons => LanguageSupport::excluding(["la", "sr"]),
            Service::Reverso => LanguageSupport::languages(REVERSO_CODES.iter().map(|(k, _)| *k)),
            _ => LanguageSupport::Any,
        }
    }

    pub fn descriptor(self) -> ProviderDescriptor {
        let d = ProviderDescriptor::new(self.id())
            .with_support(self.support())
            .with_rate_limit(Some(DEFAULT_RATE_LIMIT));
        if self.requires_key() {
            d.requiring_key()
        } else {
            d
        }
    }
}

const REVERSO_CODES: &[(&str, &str)] = &[
    ("ar", "ara"),
    ("de", "ger"),
    ("en", "eng"),
    ("es", "spa"),
    ("fr", "fra"),
    ("he", "heb"),
    ("it", "ita"),
    ("ja", "jpn"),
    ("nl", "dut"),
    ("pl", "pol"),
    ("pt", "por"),
    ("ro", "rum"),
    ("ru", "rus"),
    ("sv", "swe"),
    ("tr", "tur"),
    ("uk", "ukr"),
    ("zh", "chi"),
];

fn reverso_code(lang: &LanguageTag) -> Option<&'static str> {
    REVERSO_CODES
        .iter()
        .find(|(k, _)| *k == lang.primary())
        .map(|(_, v)| *v)
}

fn pons_dictionary(src: &str, tgt: &str) -> String {
    match (src, tgt) {
        ("de", other) | (other, "de") => format!("de{other}"),
        ("en", other) | (other, "en") => format!("en{other}"),
        (a, b) if a < b => format!("{a}{b}"),
        (a, b) => format!("{b}{a}"),
    }
}

#[derive(Debug, Clone, Default)]
pub struct HttpProviderConfig {
    pub endpoint: Option<String>,
    pub api_key: Option<String>,
    /// Azure region header for Microsoft Translator.
    pub region: Option<String>,
    pub timeout: Option<Duration>,
}

impl HttpProviderConfig {
    /// Reads the API key from the service's environment variable.
    pub fn from_env(service: Service) -> Self {
        Self {
            api_key: std::env::var(service.api_key_env()).ok().filter(|k| !k.is_empty()),
            ..Self::default()
        }
    }
}

pub struct HttpTranslator {
    service: Service,
    endpoint: String,
    api_key: Option<String>,
    region: Option<String>,
    client: Client,
}

impl HttpTranslator {
    pub fn new(service: Service, config: HttpProviderConfig) -> Result<Self, ProviderError> {
        let client = Client::builder()
            .timeout(config.timeout.unwrap_or(DEFAULT_TIMEOUT))
            .build()
            .map_err(|e| ProviderError::new(ProviderErrorKind::Network, e.to_string()))?;
        Ok(Self {
            service,
            endpoint: config
                .endpoint
                .unwrap_or_else(|| service.default_endpoint().to_string()),
            api_key: config.api_key,
            region: config.region,
            client,
        })
    }

    pub fn service(&self) -> Service {
        self.service
    }

    fn key(&self) -> Result<&str, ProviderError> {
        self.api_key.as_deref().ok_or_else(|| {
            ProviderError::new(
                ProviderErrorKind::Auth,
                format!("missing API key (set {})", self.service.api_key_env()),
            )
        })
    }

    fn request(&self, text: &str, src: &LanguageTag, tgt: &LanguageTag) -> Result<RequestBuilder, ProviderError> {
        let (s, t) = (src.primary(), tgt.primary());
        let req = match self.service {
            Service::Lingvanex => self
                .client
                .post(&self.endpoint)
                .bearer_auth(self.key()?)
                .json(&json!({"from": s, "to": t, "data": text, "platform": "api"})),
            Service::Google => self
                .client
                .post(&self.endpoint)
                .query(&[("key", self.key()?)])
                .json(&json!({"q": text, "source": s, "target": t, "format": "text"})),
            Service::ModernMt => self
                .client
                .get(&self.endpoint)
                .header("MMT-ApiKey", self.key()?)
                .query(&[("source", s), ("target", t), ("q", text)]),
            Service::Microsoft => {
                let mut req = self
                    .client
                    .post(&self.endpoint)
                    .query(&[("api-version", "3.0"), ("from", s), ("to", t)])
                    .header("Ocp-Apim-Subscription-Key", self.key()?)
                    .json(&json!([{"Text": text}]));
                if let Some(region) = &self.region {
                    req = req.header("Ocp-Apim-Subscription-Region", region);
                }
                req
            }
            Service::Yandex => self
                .client
                .post(&self.endpoint)
                .header("Authorization", format!("Api-Key {}", self.key()?))
                .json(&json!({"sourceLanguageCode": s, "targetLanguageCode": t, "texts": [text]})),
            Service::Argos => {
                let mut body = json!({"q": text, "source": s, "target": t, "format": "text"});
                if let Some(key) = &self.api_key {
                    body["api_key"] = json!(key);
                }
                self.client.post(&self.endpoint).json(&body)
            }
            Service::Reverso => {
                let unsupported = || ProviderError::new(ProviderErrorKind::UnsupportedPair, format!("{s} -> {t}"));
                let from = reverso_code(src).ok_or_else(unsupported)?;
                let to = reverso_code(tgt).ok_or_else(unsupported)?;
                self.client.post(&self.endpoint).json(&json!({
                    "format": "text",
                    "from": from,
                    "to": to,
                    "input": text,
                    "options": {"sentenceSplitter": false, "origin": "translation.web", "contextResults": false},
                }))
            }
            Service::Pons => self.client.get(&self.endpoint).header("X-Secret", self.key()?).query(&[
                ("l", pons_dictionary(s, t).as_str()),
                ("q", text),
                ("in", s),
            ]),
        };
        Ok(req)
    }
}

impl Translator for HttpTranslator {
    fn translate(&self, text: &str, source: &LanguageTag, target: &LanguageTag) -> Result<String, ProviderError> {
        let response = self.request(text, source, target)?.send().map_err(transport_error)?;
        let body = check_status(response)?;
        parse_response(self.service, &body)
    }
}

fn transport_error(e: reqwest::Error) -> ProviderError {
    ProviderError::new(ProviderErrorKind::Network, e.to_string())
}

fn check_status(response: Response) -> Result<Value, ProviderError> {
    let status = response.status();
    let retry_after = response
        .headers()
        .get(reqwest::header::RETRY_AFTER)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.trim().parse::<u64>().ok())
        .map(Duration::from_secs);
    let text = response.text().map_err(transport_error)?;
    if !status.is_success() {
        let kind = status_kind(status);
        let snippet: String = text.chars().take(200).collect();
        return Err(ProviderError::new(kind, format!("HTTP {status}: {snippet}")).with_retry_after(retry_after));
    }
    serde_json::from_str(&text)
        .map_err(|e| ProviderError::new(ProviderErrorKind::MalformedResponse, format!("invalid JSON: {e}")))
}

pub fn status_kind(status: StatusCode) -> ProviderErrorKind {
    match status.as_u16() {
        429 => ProviderErrorKind::RateLimited,
        401 | 403 => ProviderErrorKind::Auth,
        408 | 500..=599 => ProviderErrorKind::Network,
        _ => ProviderErrorKind::MalformedResponse,
    }
}

/// Extracts the translated text from a service's JSON reply.
pub fn parse_response(service: Service, body: &Value) -> Result<String, ProviderError> {
    let found = match service {
        Service::Lingvanex => body["result"].as_str().map(str::to_string),
        Service::Google => body["data"]["translations"][0]["translatedText"]
            .as_str()
            .map(str::to_string),
        Service::ModernMt => body["data"]["translation"].as_str().map(str::to_string),
        Service::Microsoft => body[0]["translations"][0]["text"].as_str().map(str::to_string),
        Service::Yandex => body["translations"][0]["text"].as_str().map(str::to_string),
        Service::Argos => body["translatedText"].as_str().map(str::to_string),
        Service::Reverso => body["translation"][0].as_str().map(str::to_string),
        Service::Pons => pons_first_target(body).map(|t| strip_tags(&t)),
    };
    match found {
        Some(text) if !text.trim().is_empty() => Ok(text),
        _ => Err(ProviderError::new(
            ProviderErrorKind::MalformedResponse,
            format!("no translation in {} response", service.id()),
        )),
    }
}

fn pons_first_target(body: &Value) -> Option<String> {
    body.as_array()?
        .iter()
        .flat_map(|lang| lang["hits"].as_array().into_iter().flatten())
        .flat_map(|hit| hit["roms"].as_array().into_iter().flatten())
        .flat_map(|rom| rom["arabs"].as_array().into_iter().flatten())
        .flat_map(|arab| arab["translations"].as_array().into_iter().flatten())
        .find_map(|t| t["target"].as_str().map(str::to_string))
}

fn strip_tags(html: &str) -> String {
    let mut out = String::with_capacity(html.len());
    let mut depth = 0usize;
    for c in html.chars() {
        match c {
            '<' => depth += 1,
            '>' if depth > 0 => depth -= 1,
            _ if depth == 0 => out.push(c),
            _ => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::serve_once;

    fn tag(s: &str) -> LanguageTag {
        LanguageTag::parse(s).unwrap()
    }

    #[test]
    fn parses_each_service_shape() {
        let cases = [
            (Service::Lingvanex, json!({"err": null, "result": "Marginalie"})),
            (
                Service::Google,
                json!({"data": {"translations": [{"translatedText": "Marginalie"}]}}),
            ),
            (
                Service::ModernMt,
                json!({"status": 200, "data": {"translation": "Marginalie"}}),
            ),
            (
                Service::Microsoft,
                json!([{"translations": [{"text": "Marginalie", "to": "de"}]}]),
            ),
            (Service::Yandex, json!({"translations": [{"text": "Marginalie"}]})),
            (Service::Argos, json!({"translatedText": "Marginalie"})),
            (Service::Reverso, json!({"translation": ["Marginalie"]})),
            (
                Service::Pons,
                json!([{"lang": "en", "hits": [{"type": "entry", "roms": [{"arabs": [{"translations": [
                    {"source": "<strong>marginal gloss</strong>", "target": "<acronym>Marginalie</acronym>"}
                ]}]}]}]}]),
            ),
        ];
        for (service, body) in cases {
            assert_eq!(parse_response(service, &body).unwrap(), "Marginalie", "{service:?}");
            let err = parse_response(service, &json!({"unexpected": true})).unwrap_err();
            assert_eq!(err.kind, ProviderErrorKind::MalformedResponse);
        }
    }

    #[test]
    fn descriptors_and_env_names() {
        assert_eq!(Service::ModernMt.api_key_env(), "WOKIE_MODERNMT_API_KEY");
        let ids: Vec<_> = Service::ALL.iter().map(|s| s.id()).collect();
        assert_eq!(ids, crate::provider::DEFAULT_PRIORITY);
        assert!(!Service::Pons.support().supports(&tag("la"), &tag("de")));
        assert!(Service::Reverso.support().supports(&tag("en"), &tag("de")));
        assert!(!Service::Reverso.support().supports(&tag("sr"), &tag("de")));
        assert_eq!(pons_dictionary("en", "de"), "deen");
        assert_eq!(pons_dictionary("fr", "es"), "esfr");
        assert!(Service::Google.descriptor().requires_key);
        assert_eq!(Service::Argos.descriptor().rate_limit, Some(5.0));
    }

    #[test]
    fn missing_key_fails_without_network() {
        let t = HttpTranslator::new(
            Service::Google,
            HttpProviderConfig {
                endpoint: Some("http://127.0.0.1:9/unreachable".into()),
                ..Default::default()
            },
        )
        .unwrap();
        let err = t.translate("x", &tag("en"), &tag("de")).unwrap_err();
        assert_eq!(err.kind, ProviderErrorKind::Auth);
    }

    #[test]
    fn libretranslate_round_trip() {
        let (addr, server) = serve_once("200 OK", "", r#"{"translatedText":"Randnotiz"}"#);
        let t = HttpTranslator::new(
            Service::Argos,
            HttpProviderConfig {
                endpoint: Some(addr),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(
            t.translate("marginal gloss", &tag("en"), &tag("de")).unwrap(),
            "Randnotiz"
        );
        let request = server.join().unwrap();
        assert!(request.starts_with("POST /translate"));
        assert!(request.contains(r#""q":"marginal gloss""#), "{request}");
        assert!(request.contains(r#""target":"de""#));
    }

    #[test]
    fn rate_limit_status_carries_retry_after() {
        let (addr, server) = serve_once("429 Too Many Requests", "Retry-After: 7\r\n", r#"{"error":"slow"}"#);
        let t = HttpTranslator::new(
            Service::Lingvanex,
            HttpProviderConfig {
                endpoint: Some(addr),
                api_key: Some("k".into()),
                ..Default::default()
            },
        )
        .unwrap();
        let err = t.translate("x", &tag("en"), &tag("de")).unwrap_err();
        assert_eq!(err.kind, ProviderErrorKind::RateLimited);
        assert_eq!(err.retry_after, Some(Duration::from_secs(7)));
        let request = server.join().unwrap();
        assert!(request.to_ascii_lowercase().contains("authorization: bearer k"));
    }

    #[test]
    fn status_mapping() {
        assert_eq!(status_kind(StatusCode::UNAUTHORIZED), ProviderErrorKind::Auth);
        assert_eq!(status_kind(StatusCode::BAD_GATEWAY), ProviderErrorKind::Network);
        assert_eq!(
            status_kind(StatusCode::BAD_REQUEST),
            ProviderErrorKind::MalformedResponse
        );
    }
}
