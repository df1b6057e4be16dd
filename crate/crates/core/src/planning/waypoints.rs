//! Waypoint wire format: a JSON array of `{"x": number, "y": number}`.

use serde_json::Value;

use crate::geometry::Point;

use super::PlanningError;

/// Extracts the first JSON array of objects from free text.
///
/// Model output is often wrapped in prose or code fences, so every `[` is
/// tried as the start of an array. Arrays whose elements are not all objects
/// are skipped; the first array of objects must carry numeric `x` and `y` on
/// every element.
pub fn parse_waypoints(text: &str) -> Result<Vec<Point>, PlanningError> {
    for (start, _) in text.match_indices('[') {
        let mut stream = serde_json::Deserializer::from_str(&text[start..]).into_iter::<Value>();
        let Some(Ok(Value::Array(items))) = stream.next() else {
            continue;
        };
        if items.is_empty() || !items.iter().all(Value::is_object) {
            continue;
        }
        return items
            .iter()
            .enumerate()
            .map(|(i, item)| {
                let coord = |key: &str| {
                    item.get(key)
                        .and_then(Value::as_f64)
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| {
                            PlanningError::ParseFailure(format!(
                                "element {i} has no numeric `{key}`"
                            ))
                        })
                };
                Ok(Point::new(coord("x")?, coord("y")?))
            })
            .collect();
    }
    Err(PlanningError::ParseFailure(
        "no JSON array of waypoint objects found".into(),
    ))
}

/// Lossy UTF-8 entry point for raw bytes.
pub fn parse_waypoints_bytes(bytes: &[u8]) -> Result<Vec<Point>, PlanningError> {
    parse_waypoints(&String::from_utf8_lossy(bytes))
}

/// Serializes points with exactly the keys `x` and `y`.
pub fn waypoints_to_json(points: &[Point]) -> String {
    let items: Vec<Value> = points
        .iter()
        .map(|p| serde_json::json!({ "x": p.x, "y": p.y }))
        .collect();
    Value::Array(items).to_string()
}
