//! Canonical heap dumps and digests.
//!
//! A dump lists every live object in handle order as JSON.  Identical heaps
//! give byte-identical dumps, so the SHA-256 of a dump is a stable fingerprint
//! for comparing kernels driven along different paths.

use crate::arena::{Arena, Heaps, KernelObject};
use crate::kernel::Kernel;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

fn entries<T: KernelObject + Serialize>(arena: &Arena<T>, kind: &str, out: &mut Vec<(u64, Value)>) {
    for (h, payload) in arena.iter() {
        out.push((
            h.value(),
            json!({ "handle": h.value(), "kind": kind, "object": payload }),
        ));
    }
}

impl Heaps {
    /// Every live object, sorted by handle.
    pub fn dump_value(&self) -> Value {
        let mut all = Vec::with_capacity(self.object_count());
        entries(self.type_formers(), "type-former", &mut all);
        entries(self.types(), "type", &mut all);
        entries(self.constants(), "constant", &mut all);
        entries(self.terms(), "term", &mut all);
        entries(self.theorems(), "theorem", &mut all);
        all.sort_by_key(|(h, _)| *h);
        json!({
            "next": self.next_handle(),
            "objects": all.into_iter().map(|(_, v)| v).collect::<Vec<_>>(),
        })
    }

    pub fn dump(&self) -> String {
        serde_json::to_string_pretty(&self.dump_value()).expect("heap dump serializes")
    }

    /// Hex SHA-256 of the compact heap dump.
    pub fn digest(&self) -> String {
        hex_digest(self.dump_value().to_string().as_bytes())
    }
}

impl Kernel {
    /// The heaps plus policy, history, obligations and filesystem contents.
    pub fn state_value(&self) -> Value {
        json!({
            "heaps": self.heaps.dump_value(),
            "policy": self.policy.current(),
            "history": self.policy.history(),
            "obligations": self.policy.obligations().collect::<Vec<_>>(),
            "files": self.vfs.files().iter()
                .map(|(p, b)| (p.clone(), Value::from(b.iter().map(|x| *x as u64).collect::<Vec<_>>())))
                .collect::<serde_json::Map<_, _>>(),
        })
    }

    pub fn heap_digest(&self) -> String {
        self.heaps.digest()
    }

    pub fn state_digest(&self) -> String {
        hex_digest(self.state_value().to_string().as_bytes())
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
