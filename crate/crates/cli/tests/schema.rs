//! The shipped run-configuration schema must track the flags clap accepts.

use std::collections::BTreeSet;

use clap::CommandFactory;
use serde_json::Value;
use unpin_cli::args::Cli;
use unpin_cli::RunConfig;

fn schema() -> Value {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../schema/run-config.schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn schema_params(s: &Value) -> Vec<(String, BTreeSet<String>)> {
    s["allOf"]
        .as_array()
        .unwrap()
        .iter()
        .map(|branch| {
            let cmd = branch["if"]["properties"]["command"]["const"].as_str().unwrap().to_string();
            let props = branch["then"]["properties"]["parameters"]["properties"].as_object().unwrap();
            (cmd, props.keys().cloned().collect())
        })
        .collect()
}

#[test]
fn schema_properties_match_cli_flags() {
    let s = schema();
    let cli = Cli::command();
    let listed: BTreeSet<String> = s["properties"]["command"]["enum"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().into()).collect();
    let branches = schema_params(&s);
    assert_eq!(listed, branches.iter().map(|(c, _)| c.clone()).collect());
    for (cmd, props) in branches {
        let sub = cli.find_subcommand(&cmd).unwrap_or_else(|| panic!("no subcommand {cmd}"));
        let flags: BTreeSet<String> = sub
            .get_arguments()
            .filter(|a| a.get_id() != "out" && a.get_id() != "help")
            .map(|a| a.get_id().as_str().to_string())
            .collect();
        assert_eq!(props, flags, "{cmd}");
    }
}

#[test]
fn schema_top_level_matches_run_config() {
    let s = schema();
    assert_eq!(s["additionalProperties"], false);
    let keys: BTreeSet<&str> = s["properties"].as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["command", "output_dir", "parameters"].into_iter().collect());
    let cfg: RunConfig = serde_json::from_str(r#"{"command": "repro", "parameters": {"preset": "table1", "quick": true}}"#).unwrap();
    assert_eq!(cfg.to_argv().unwrap(), ["unpin", "repro", "table1", "--quick"]);
}
