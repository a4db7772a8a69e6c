//! Node graphs with a content-addressed artifact cache.
//!
//! A graph file looks like
//!
//! ```json
//! {
//!   "version": 1,
//!   "nodes": [
//!     {"id": "scene", "kind": "synth", "params": {"seed": 3}},
//!     {"id": "fused", "kind": "fuse", "inputs": ["scene"],
//!      "params": {"tracks": ["a.trk", "b.trk"]}}
//!   ]
//! }
//! ```
//!
//! Each node's cache key is the SHA-256 of a canonical JSON document holding
//! its kind, parameters, upstream keys and the digests of any external input
//! files. Node ids are not part of the key. Entries live in
//! `<cache>/<key>/out/` next to a `meta.json`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::ops::{Inputs, NodeKind, OpError, Resolved};

pub const GRAPH_VERSION: u64 = 1;
const CACHE_FORMAT: u64 = 1;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("graph file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported graph version {0}")]
    UnsupportedVersion(u64),
    #[error("duplicate node id {0:?}")]
    DuplicateNode(String),
    #[error("node {node:?}: unknown kind {kind:?}")]
    UnknownKind { node: String, kind: String },
    #[error("node {node:?}: unknown input {input:?}")]
    UnknownInput { node: String, input: String },
    #[error("cycle through nodes {0:?}")]
    CycleDetected(Vec<String>),
    #[error("node {node:?}: {source}")]
    Node { node: String, source: OpError },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: String,
    pub kind: NodeKind,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default)]
    pub inputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Graph {
    pub version: u64,
    pub nodes: Vec<NodeSpec>,
}

#[derive(Deserialize)]
struct RawNode {
    id: String,
    kind: String,
    #[serde(default)]
    params: Map<String, Value>,
    #[serde(default)]
    inputs: Vec<String>,
}

#[derive(Deserialize)]
struct RawGraph {
    #[serde(default = "default_version")]
    version: u64,
    nodes: Vec<RawNode>,
}

fn default_version() -> u64 {
    GRAPH_VERSION
}

impl Graph {
    pub fn new(nodes: Vec<NodeSpec>) -> Self {
        Self { version: GRAPH_VERSION, nodes }
    }

    pub fn parse(text: &str) -> Result<Self, PipelineError> {
        let raw: RawGraph = serde_json::from_str(text)?;
        if raw.version != GRAPH_VERSION {
            return Err(PipelineError::UnsupportedVersion(raw.version));
        }
        let nodes = raw
            .nodes
            .into_iter()
            .map(|n| {
                let kind = NodeKind::parse(&n.kind).ok_or_else(|| PipelineError::UnknownKind { node: n.id.clone(), kind: n.kind })?;
                Ok(NodeSpec { id: n.id, kind, params: n.params, inputs: n.inputs })
            })
            .collect::<Result<Vec<_>, PipelineError>>()?;
        let g = Self { version: raw.version, nodes };
        g.check()?;
        Ok(g)
    }

    pub fn read(path: &Path) -> Result<Self, PipelineError> {
        Self::parse(&std::fs::read_to_string(path).map_err(io_err(path))?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serializes")
    }

    pub fn node(&self, id: &str) -> Option<&NodeSpec> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn node_mut(&mut self, id: &str) -> Option<&mut NodeSpec> {
        self.nodes.iter_mut().find(|n| n.id == id)
    }

    fn check(&self) -> Result<(), PipelineError> {
        let mut ids = BTreeSet::new();
        for n in &self.nodes {
            if !ids.insert(n.id.as_str()) {
                return Err(PipelineError::DuplicateNode(n.id.clone()));
            }
        }
        for n in &self.nodes {
            if let Some(bad) = n.inputs.iter().find(|i| !ids.contains(i.as_str())) {
                return Err(PipelineError::UnknownInput { node: n.id.clone(), input: bad.clone() });
            }
        }
        Ok(())
    }
}

/// Execution order: every node after its inputs, ready nodes taken in
/// ascending id order.
pub fn topo_order(graph: &Graph) -> Result<Vec<String>, PipelineError> {
    graph.check()?;
    let mut indegree: BTreeMap<&str, usize> = graph.nodes.iter().map(|n| (n.id.as_str(), 0)).collect();
    let mut children: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for n in &graph.nodes {
        let unique: BTreeSet<&str> = n.inputs.iter().map(String::as_str).collect();
        for i in unique {
            *indegree.get_mut(n.id.as_str()).expect("checked") += 1;
            children.entry(i).or_default().push(n.id.as_str());
        }
    }
    let mut ready: BTreeSet<&str> = indegree.iter().filter(|(_, d)| **d == 0).map(|(id, _)| *id).collect();
    let mut order = Vec::with_capacity(graph.nodes.len());
    while let Some(id) = ready.pop_first() {
        order.push(id.to_string());
        for c in children.get(id).into_iter().flatten() {
            let d = indegree.get_mut(c).expect("known node");
            *d -= 1;
            if *d == 0 {
                ready.insert(c);
            }
        }
    }
    if order.len() < graph.nodes.len() {
        let stuck = indegree.into_iter().filter(|(_, d)| *d > 0).map(|(id, _)| id.to_string()).collect();
        return Err(PipelineError::CycleDetected(stuck));
    }
    Ok(order)
}

/// Sorts object keys recursively.
pub fn canonical(v: &Value) -> Value {
    match v {
        Value::Object(m) => {
            let sorted: BTreeMap<&String, Value> = m.iter().map(|(k, v)| (k, canonical(v))).collect();
            Value::Object(sorted.into_iter().map(|(k, v)| (k.clone(), v)).collect())
        }
        Value::Array(a) => Value::Array(a.iter().map(canonical).collect()),
        other => other.clone(),
    }
}

/// SHA-256 of a file, or of a directory's sorted `(name, digest)` listing.
pub fn digest_path(path: &Path) -> Result<String, PipelineError> {
    let mut h = Sha256::new();
    if path.is_dir() {
        let mut entries: Vec<_> = std::fs::read_dir(path)
            .map_err(io_err(path))?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()
            .map_err(io_err(path))?;
        entries.sort();
        h.update(b"dir\n");
        for e in entries {
            h.update(e.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default().as_bytes());
            h.update(b"\0");
            h.update(digest_path(&e)?.as_bytes());
            h.update(b"\n");
        }
    } else {
        h.update(b"file\n");
        h.update(std::fs::read(path).map_err(io_err(path))?);
    }
    Ok(hex::encode(h.finalize()))
}

fn file_names(v: &Value) -> Vec<&str> {
    match v {
        Value::String(s) => vec![s.as_str()],
        Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
        _ => Vec::new(),
    }
}

/// Cache key of a node given its upstream keys and lookup context.
pub fn cache_key(node: &NodeSpec, upstream_keys: &[String], inputs: &Inputs) -> Result<String, PipelineError> {
    let mut params = node.params.clone();
    for (k, v) in node.kind.default_files() {
        params.entry(k.to_string()).or_insert_with(|| Value::String(v.to_string()));
    }
    let mut files = Map::new();
    for &key in node.kind.file_params() {
        let Some(v) = params.get(key) else { continue };
        let mut list = Vec::new();
        for name in file_names(v) {
            // unresolvable names are left for the node to report
            let entry = match inputs.locate(name) {
                Ok(Resolved::Upstream { index, .. }) => json!({"name": name, "upstream": index}),
                Ok(Resolved::External(p)) => json!({"name": name, "sha256": digest_path(&p)?}),
                Err(_) => json!({"name": name, "missing": true}),
            };
            list.push(entry);
        }
        files.insert(key.to_string(), Value::Array(list));
    }
    let doc = canonical(&json!({
        "cache_format": CACHE_FORMAT,
        "kind": node.kind.name(),
        "params": Value::Object(params),
        "inputs": upstream_keys,
        "files": Value::Object(files),
    }));
    let bytes = serde_json::to_vec(&doc).expect("json value serializes");
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeStatus {
    Hit,
    Executed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeRun {
    pub node_id: String,
    pub kind: NodeKind,
    pub key: String,
    pub status: NodeStatus,
    pub output: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct RunReport {
    /// In execution order.
    pub nodes: Vec<NodeRun>,
}

impl RunReport {
    pub fn executed(&self) -> Vec<&str> {
        self.nodes.iter().filter(|n| n.status == NodeStatus::Executed).map(|n| n.node_id.as_str()).collect()
    }

    pub fn output(&self, node_id: &str) -> Option<&Path> {
        self.nodes.iter().find(|n| n.node_id == node_id).map(|n| n.output.as_path())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheMeta {
    key: String,
    kind: NodeKind,
    params: Map<String, Value>,
    inputs: Vec<String>,
    created_by: String,
    created_unix_s: u64,
}

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Content-addressed artifact store.
#[derive(Debug, Clone)]
pub struct Cache {
    root: PathBuf,
}

impl Cache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn entry_dir(&self, key: &str) -> PathBuf {
        self.root.join(key)
    }

    pub fn output_dir(&self, key: &str) -> PathBuf {
        self.entry_dir(key).join("out")
    }

    /// Entries appear atomically, so a present `meta.json` means complete.
    pub fn contains(&self, key: &str) -> bool {
        self.entry_dir(key).join("meta.json").is_file()
    }

    /// Runs `produce` into a scratch directory and publishes it under `key`.
    /// When another writer published first, its entry is kept.
    fn publish(
        &self,
        key: &str,
        meta: &CacheMeta,
        produce: impl FnOnce(&Path) -> Result<(), OpError>,
        node: &str,
    ) -> Result<(), PipelineError> {
        std::fs::create_dir_all(&self.root).map_err(io_err(&self.root))?;
        let n = TMP_COUNTER.fetch_add(1, Ordering::Relaxed);
        let tmp = self.root.join(format!(".tmp-{key}-{}-{n}", std::process::id()));
        let out = tmp.join("out");
        std::fs::create_dir_all(&out).map_err(io_err(&out))?;
        if let Err(source) = produce(&out) {
            let _ = std::fs::remove_dir_all(&tmp);
            return Err(PipelineError::Node { node: node.to_string(), source });
        }
        let meta_path = tmp.join("meta.json");
        let text = serde_json::to_string_pretty(meta)?;
        std::fs::write(&meta_path, text).map_err(io_err(&meta_path))?;
        let dest = self.entry_dir(key);
        if std::fs::rename(&tmp, &dest).is_err() {
            if self.contains(key) {
                let _ = std::fs::remove_dir_all(&tmp);
                return Ok(());
            }
            // a partial entry left by an interrupted writer
            let _ = std::fs::remove_dir_all(&dest);
            std::fs::rename(&tmp, &dest).map_err(io_err(&dest))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Base for relative external file parameters.
    pub base_dir: PathBuf,
    pub cache_dir: PathBuf,
}

/// Executes a graph, reusing cached node outputs.
pub fn run_graph(graph: &Graph, opts: &RunOptions) -> Result<RunReport, PipelineError> {
    let order = topo_order(graph)?;
    let cache = Cache::new(&opts.cache_dir);
    let mut keys: BTreeMap<String, String> = BTreeMap::new();
    let mut report = RunReport::default();
    for id in order {
        let node = graph.node(&id).expect("ordered ids exist");
        let upstream_keys: Vec<String> = node.inputs.iter().map(|i| keys[i].clone()).collect();
        let inputs = Inputs {
            base_dir: opts.base_dir.clone(),
            upstream: upstream_keys.iter().map(|k| cache.output_dir(k)).collect(),
        };
        let key = cache_key(node, &upstream_keys, &inputs)?;
        let status = if cache.contains(&key) {
            NodeStatus::Hit
        } else {
            let meta = CacheMeta {
                key: key.clone(),
                kind: node.kind,
                params: node.params.clone(),
                inputs: upstream_keys.clone(),
                created_by: node.id.clone(),
                created_unix_s: std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
            };
            cache.publish(&key, &meta, |out| node.kind.execute(&node.params, &inputs, out), &node.id)?;
            NodeStatus::Executed
        };
        report.nodes.push(NodeRun { node_id: id.clone(), kind: node.kind, key: key.clone(), status, output: cache.output_dir(&key) });
        keys.insert(id, key);
    }
    Ok(report)
}

/// Copies every node's outputs to `<dest>/<node_id>/`.
pub fn export_outputs(report: &RunReport, dest: &Path) -> Result<(), PipelineError> {
    for n in &report.nodes {
        copy_dir(&n.output, &dest.join(&n.node_id))?;
    }
    Ok(())
}

fn copy_dir(from: &Path, to: &Path) -> Result<(), PipelineError> {
    std::fs::create_dir_all(to).map_err(io_err(to))?;
    for e in std::fs::read_dir(from).map_err(io_err(from))? {
        let e = e.map_err(io_err(from))?;
        let src = e.path();
        let dst = to.join(e.file_name());
        if src.is_dir() {
            copy_dir(&src, &dst)?;
        } else {
            std::fs::copy(&src, &dst).map_err(io_err(&src))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(id: &str, inputs: &[&str]) -> NodeSpec {
        NodeSpec { id: id.into(), kind: NodeKind::Fuse, params: Map::new(), inputs: inputs.iter().map(|s| s.to_string()).collect() }
    }

    #[test]
    fn single_and_chain() {
        assert_eq!(topo_order(&Graph::new(vec![node("a", &[])])).unwrap(), ["a"]);
        let g = Graph::new(vec![node("c", &["b"]), node("b", &["a"]), node("a", &[])]);
        assert_eq!(topo_order(&g).unwrap(), ["a", "b", "c"]);
    }

    #[test]
    fn ties_by_id() {
        let g = Graph::new(vec![node("z", &[]), node("m", &["z"]), node("b", &[]), node("k", &["b", "z"])]);
        assert_eq!(topo_order(&g).unwrap(), ["b", "z", "k", "m"]);
    }

    #[test]
    fn cycle_detected() {
        let g = Graph::new(vec![node("a", &["b"]), node("b", &["a"])]);
        assert!(matches!(topo_order(&g), Err(PipelineError::CycleDetected(ids)) if ids == ["a", "b"]));
    }

    #[test]
    fn graph_errors() {
        let dup = r#"{"nodes": [{"id": "a", "kind": "fuse"}, {"id": "a", "kind": "eval"}]}"#;
        assert!(matches!(Graph::parse(dup), Err(PipelineError::DuplicateNode(_))));
        let kind = r#"{"nodes": [{"id": "a", "kind": "render"}]}"#;
        assert!(matches!(Graph::parse(kind), Err(PipelineError::UnknownKind { .. })));
        let input = r#"{"nodes": [{"id": "a", "kind": "fuse", "inputs": ["q"]}]}"#;
        assert!(matches!(Graph::parse(input), Err(PipelineError::UnknownInput { .. })));
    }

    #[test]
    fn key_ignores_param_order_and_node_id() {
        let inputs = Inputs::standalone("/nonexistent");
        let a: NodeSpec = serde_json::from_str(r#"{"id": "x", "kind": "synth", "params": {"seed": 1, "frames": 9}}"#).unwrap();
        let b: NodeSpec = serde_json::from_str(r#"{"id": "y", "kind": "synth", "params": {"frames": 9, "seed": 1}}"#).unwrap();
        assert_eq!(cache_key(&a, &[], &inputs).unwrap(), cache_key(&b, &[], &inputs).unwrap());
        let c: NodeSpec = serde_json::from_str(r#"{"id": "x", "kind": "synth", "params": {"seed": 2, "frames": 9}}"#).unwrap();
        assert_ne!(cache_key(&a, &[], &inputs).unwrap(), cache_key(&c, &[], &inputs).unwrap());
    }
}
