#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::thread;

use corridor_nav::geometry::Point;
use corridor_nav::planning::{oracle_plan, waypoints_to_json, PlannerConfig};
use corridor_nav::world::EnvironmentMap;

/// Minimal HTTP/1.1 server answering every request with `handler(body)`.
/// Returns the base URL; the listener thread lives until the process exits.
pub fn serve<F>(handler: F) -> String
where
    F: Fn(&str) -> (u16, String) + Send + 'static,
{
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut length = 0usize;
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
                    break;
                }
                let lower = line.to_ascii_lowercase();
                if let Some(v) = lower.strip_prefix("content-length:") {
                    length = v.trim().parse().unwrap_or(0);
                }
            }
            let mut body = vec![0u8; length];
            let _ = reader.read_exact(&mut body);
            let (status, text) = handler(&String::from_utf8_lossy(&body));
            let reply = format!(
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{text}",
                text.len()
            );
            let _ = stream.write_all(reply.as_bytes());
        }
    });
    format!("http://{addr}")
}

fn number_after(text: &str, key: &str) -> Option<f64> {
    let start = text.find(key)? + key.len();
    let rest = &text[start..];
    let end = rest
        .find(|c: char| !(c.is_ascii_digit() || c == '.' || c == '-' || c == 'e'))
        .unwrap_or(rest.len());
    rest[..end].parse().ok()
}

/// A chat endpoint that reads pose and target back out of the prompts and
/// answers with fenced oracle waypoints, the way a chatty model would.
pub fn oracle_chat_server(map: EnvironmentMap) -> String {
    serve(move |body| {
        let v: serde_json::Value = serde_json::from_str(body).unwrap();
        let system = v["messages"][0]["content"].as_str().unwrap_or("");
        let user = v["messages"][1]["content"].as_str().unwrap_or("");
        let tail = &system[system.find("Current robot pose:").unwrap()..];
        let pose = Point::new(number_after(tail, "x = ").unwrap(), number_after(tail, ", y = ").unwrap());
        let name_start = user.find("Target object: ").unwrap() + "Target object: ".len();
        let name_end = user[name_start..].find(" at (").unwrap() + name_start;
        let target = map.object(&user[name_start..name_end]).unwrap();
        let points = oracle_plan(&map, pose, target, &PlannerConfig::default()).unwrap();
        let content = format!("Here is the path:\n```json\n{}\n```", waypoints_to_json(&points));
        (200, serde_json::json!({ "message": { "content": content } }).to_string())
    })
}
