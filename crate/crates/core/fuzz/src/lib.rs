//! Bodies of the fuzz targets, shared with the corpus replay test in `../tests`.
//! Each one must return without panicking for any input.

use clap::ValueEnum;
use cocyclelab::base_dynamics::Word;
use cocyclelab::cli::config::{apply_overrides, from_value, parse_overrides};
use cocyclelab::cli::Command;
use cocyclelab::livsic::TransferTable;
use serde_json::{json, Value};

/// Config JSON against every command; an accepted config must survive its own serialization.
pub fn config(data: &[u8]) {
    let Ok(value) = serde_json::from_slice::<Value>(data) else {
        return;
    };
    for &command in Command::value_variants() {
        if let Ok(cfg) = from_value(&value, command, None) {
            let again = serde_json::to_value(&cfg).expect("configs serialize");
            let back = from_value(&again, command, None).expect("embedded config reparses");
            assert_eq!(back.sft, cfg.sft);
            assert_eq!(back.generator, cfg.generator);
            assert_eq!(back.measure, cfg.measure);
            assert_eq!(back.params, cfg.params);
        }
    }
}

/// One argument per line, applied to a small valid config.
pub fn overrides(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let args: Vec<String> = text.lines().map(str::to_string).collect();
    let Ok(pairs) = parse_overrides(&args) else {
        return;
    };
    let mut value = json!({
        "sft": {"alphabet": 2},
        "generator": {"dim": 2, "builtin": {"family": "identity"}},
        "measure": {"kind": "uniform"},
        "params": {"seed": 1}
    });
    if apply_overrides(&mut value, &pairs).is_ok() {
        for &command in Command::value_variants() {
            let _ = from_value(&value, command, Some("1000"));
        }
    }
}

/// Transfer tables round-trip through their JSON form.
pub fn transfer_table(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(t) = TransferTable::from_json(text) {
        let back = TransferTable::from_json(&t.to_json()).expect("written tables reparse");
        assert_eq!(back.depth(), t.depth());
        assert_eq!(back.entries(), t.entries());
    }
}

/// Words round-trip through their text form.
pub fn word(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(w) = text.parse::<Word>() {
        assert_eq!(w.to_string().parse::<Word>().ok(), Some(w));
    }
}
