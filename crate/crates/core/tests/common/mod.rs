//! Validator for the subset of JSON Schema used by the shipped result schema.

use serde_json::Value;

pub fn validate(schema: &Value, doc: &Value) -> Vec<String> {
    let mut errors = Vec::new();
    check(schema, schema, doc, "$", &mut errors);
    errors
}

fn resolve<'a>(root: &'a Value, node: &'a Value) -> &'a Value {
    match node.get("$ref").and_then(Value::as_str) {
        Some(r) => {
            let path = r.strip_prefix("#/").expect("local reference");
            let target = path.split('/').fold(root, |v, key| &v[key]);
            resolve(root, target)
        }
        None => node,
    }
}

fn type_matches(name: &str, v: &Value) -> bool {
    match name {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "number" => v.is_number(),
        "integer" => v.is_i64() || v.is_u64(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        other => panic!("unsupported type {other}"),
    }
}

fn check(root: &Value, node: &Value, v: &Value, at: &str, errors: &mut Vec<String>) {
    let node = resolve(root, node);
    if let Some(t) = node.get("type") {
        let ok = match t {
            Value::String(s) => type_matches(s, v),
            Value::Array(ts) => ts.iter().any(|s| type_matches(s.as_str().unwrap(), v)),
            _ => panic!("bad type keyword"),
        };
        if !ok {
            errors.push(format!("{at}: expected type {t}, found {v}"));
            return;
        }
    }
    if let Some(c) = node.get("const") {
        if c != v {
            errors.push(format!("{at}: expected {c}, found {v}"));
        }
    }
    if let Some(Value::Array(options)) = node.get("enum") {
        if !options.contains(v) {
            errors.push(format!("{at}: {v} not one of {options:?}"));
        }
    }
    if let Some(x) = v.as_f64() {
        if let Some(min) = node.get("minimum").and_then(Value::as_f64) {
            if x < min {
                errors.push(format!("{at}: {x} below minimum {min}"));
            }
        }
        if let Some(max) = node.get("maximum").and_then(Value::as_f64) {
            if x > max {
                errors.push(format!("{at}: {x} above maximum {max}"));
            }
        }
    }
    if let Value::Object(map) = v {
        let props = node.get("properties").and_then(Value::as_object);
        if let Some(Value::Array(req)) = node.get("required") {
            for r in req {
                let key = r.as_str().unwrap();
                if !map.contains_key(key) {
                    errors.push(format!("{at}: missing required `{key}`"));
                }
            }
        }
        if let Some(n) = node.get("minProperties").and_then(Value::as_u64) {
            if (map.len() as u64) < n {
                errors.push(format!("{at}: fewer than {n} properties"));
            }
        }
        if let Some(n) = node.get("maxProperties").and_then(Value::as_u64) {
            if (map.len() as u64) > n {
                errors.push(format!("{at}: more than {n} properties"));
            }
        }
        for (key, value) in map {
            match props.and_then(|p| p.get(key)) {
                Some(sub) => check(root, sub, value, &format!("{at}.{key}"), errors),
                None if node.get("additionalProperties") == Some(&Value::Bool(false)) => {
                    errors.push(format!("{at}: unexpected property `{key}`"))
                }
                None => {}
            }
        }
    }
    if let Value::Array(items) = v {
        if let Some(n) = node.get("minItems").and_then(Value::as_u64) {
            if (items.len() as u64) < n {
                errors.push(format!("{at}: fewer than {n} items"));
            }
        }
        if let Some(n) = node.get("maxItems").and_then(Value::as_u64) {
            if (items.len() as u64) > n {
                errors.push(format!("{at}: more than {n} items"));
            }
        }
        let prefix = node.get("prefixItems").and_then(Value::as_array);
        for (i, item) in items.iter().enumerate() {
            let sub = prefix.and_then(|p| p.get(i)).or_else(|| node.get("items"));
            if let Some(sub) = sub {
                check(root, sub, item, &format!("{at}[{i}]"), errors);
            }
        }
    }
}
