//! A minimal in-memory filesystem behind the gated FS syscalls.

use crate::error::KernelError;
use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine as _;
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

/// Errors loading or saving a filesystem image.
#[derive(Debug, Error)]
pub enum ImageError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("manifest is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("contents of {path} are not valid base64: {source}")]
    Base64 {
        path: String,
        source: base64::DecodeError,
    },
    #[error("paths {0:?} and {1:?} normalize to the same file")]
    DuplicatePath(String, String),
    #[error("{0} is not valid UTF-8")]
    NonUtf8Path(String),
}

/// Collapses `.`, `..` and repeated separators; the result always starts with
/// `/`.  `..` at the root stays at the root.
pub fn normalize_path(path: &str) -> String {
    let mut parts: Vec<&str> = Vec::new();
    for part in path.split('/') {
        match part {
            "" | "." => {}
            ".." => {
                parts.pop();
            }
            p => parts.push(p),
        }
    }
    format!("/{}", parts.join("/"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpenMode {
    Read,
    Write,
}

impl OpenMode {
    pub fn from_flags(flags: u64) -> Result<OpenMode, KernelError> {
        match flags {
            0 => Ok(OpenMode::Read),
            1 => Ok(OpenMode::Write),
            _ => Err(KernelError::FsBadFlags),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpenFile {
    pub path: String,
    pub mode: OpenMode,
    pub cursor: usize,
}

pub const FIRST_DESCRIPTOR: u32 = 3;

#[derive(Clone, Debug)]
pub struct Vfs {
    files: BTreeMap<String, Vec<u8>>,
    descriptors: BTreeMap<u32, OpenFile>,
    next_descriptor: u32,
    interned: BTreeMap<String, u64>,
    mutations: u64,
}

impl Default for Vfs {
    fn default() -> Self {
        Vfs {
            files: BTreeMap::new(),
            descriptors: BTreeMap::new(),
            next_descriptor: FIRST_DESCRIPTOR,
            interned: BTreeMap::new(),
            mutations: 0,
        }
    }
}

impl Vfs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_files<I, P, B>(files: I) -> Result<Self, ImageError>
    where
        I: IntoIterator<Item = (P, B)>,
        P: AsRef<str>,
        B: Into<Vec<u8>>,
    {
        let mut vfs = Vfs::new();
        let mut origin: BTreeMap<String, String> = BTreeMap::new();
        for (path, bytes) in files {
            let raw = path.as_ref().to_string();
            let norm = normalize_path(&raw);
            if let Some(prev) = origin.insert(norm.clone(), raw.clone()) {
                return Err(ImageError::DuplicatePath(prev, raw));
            }
            vfs.files.insert(norm, bytes.into());
        }
        Ok(vfs)
    }

    /// JSON object mapping paths to base64 contents.
    pub fn from_manifest(json: &str) -> Result<Self, ImageError> {
        let map: BTreeMap<String, String> = serde_json::from_str(json)?;
        let mut files = Vec::with_capacity(map.len());
        for (path, encoded) in map {
            let bytes = BASE64
                .decode(encoded.as_bytes())
                .map_err(|source| ImageError::Base64 {
                    path: path.clone(),
                    source,
                })?;
            files.push((path, bytes));
        }
        Self::from_files(files)
    }

    /// Loads every regular file below `root`, keyed by its path relative to
    /// `root`.
    pub fn from_directory(root: &Path) -> Result<Self, ImageError> {
        fn walk(dir: &Path, root: &Path, out: &mut Vec<(String, Vec<u8>)>) -> Result<(), ImageError> {
            let mut entries = std::fs::read_dir(dir)?.collect::<Result<Vec<_>, _>>()?;
            entries.sort_by_key(|e| e.file_name());
            for entry in entries {
                let path = entry.path();
                if path.is_dir() {
                    walk(&path, root, out)?;
                } else if path.is_file() {
                    let rel = path.strip_prefix(root).expect("walk stays below root");
                    let rel = rel
                        .to_str()
                        .ok_or_else(|| ImageError::NonUtf8Path(rel.display().to_string()))?;
                    out.push((format!("/{rel}"), std::fs::read(&path)?));
                }
            }
            Ok(())
        }
        let mut files = Vec::new();
        walk(root, root, &mut files)?;
        Self::from_files(files)
    }

    pub fn to_manifest(&self) -> String {
        let map: BTreeMap<&str, String> = self
            .files
            .iter()
            .map(|(p, b)| (p.as_str(), BASE64.encode(b)))
            .collect();
        serde_json::to_string_pretty(&map).expect("string map serializes")
    }

    pub fn files(&self) -> &BTreeMap<String, Vec<u8>> {
        &self.files
    }

    pub fn file(&self, path: &str) -> Option<&[u8]> {
        self.files.get(&normalize_path(path)).map(Vec::as_slice)
    }

    pub fn descriptor(&self, fd: u32) -> Option<&OpenFile> {
        self.descriptors.get(&fd)
    }

    /// Number of completed operations that changed file contents or created
    /// files.
    pub fn mutation_count(&self) -> u64 {
        self.mutations
    }

    /// Stable identifier for `path`, assigned in first-use order from 0.
    pub fn intern(&mut self, path: &str) -> u64 {
        let next = self.interned.len() as u64;
        *self.interned.entry(normalize_path(path)).or_insert(next)
    }

    pub fn interned_id(&self, path: &str) -> Option<u64> {
        self.interned.get(&normalize_path(path)).copied()
    }

    /// Checks that `fd` is open in `mode`.
    pub fn check_descriptor(&self, fd: u64, mode: OpenMode) -> Result<u32, KernelError> {
        let fd = u32::try_from(fd).map_err(|_| KernelError::FsBadDescriptor)?;
        match self.descriptors.get(&fd) {
            Some(f) if f.mode == mode => Ok(fd),
            _ => Err(KernelError::FsBadDescriptor),
        }
    }

    /// Opens `path`.  Write mode creates the file if absent and truncates it
    /// otherwise.
    pub fn open(&mut self, path: &str, mode: OpenMode) -> Result<u32, KernelError> {
        let path = normalize_path(path);
        match mode {
            OpenMode::Read if !self.files.contains_key(&path) => return Err(KernelError::FsNotFound),
            OpenMode::Read => {}
            OpenMode::Write => {
                self.files.insert(path.clone(), Vec::new());
                self.mutations += 1;
            }
        }
        let fd = self.next_descriptor;
        self.next_descriptor = fd.checked_add(1).ok_or(KernelError::FsBadDescriptor)?;
        self.descriptors.insert(
            fd,
            OpenFile {
                path,
                mode,
                cursor: 0,
            },
        );
        Ok(fd)
    }

    /// Reads up to `len` bytes at the cursor; short at end of file.
    pub fn read(&mut self, fd: u32, len: usize) -> Result<Vec<u8>, KernelError> {
        let f = self.descriptors.get_mut(&fd).ok_or(KernelError::FsBadDescriptor)?;
        if f.mode != OpenMode::Read {
            return Err(KernelError::FsBadDescriptor);
        }
        let contents = self.files.get(&f.path).map(Vec::as_slice).unwrap_or(&[]);
        let start = f.cursor.min(contents.len());
        let end = start.saturating_add(len).min(contents.len());
        f.cursor = end;
        Ok(contents[start..end].to_vec())
    }

    /// Writes `data` at the cursor, extending the file as needed.
    pub fn write(&mut self, fd: u32, data: &[u8]) -> Result<usize, KernelError> {
        let f = self.descriptors.get_mut(&fd).ok_or(KernelError::FsBadDescriptor)?;
        if f.mode != OpenMode::Write {
            return Err(KernelError::FsBadDescriptor);
        }
        let contents = self.files.entry(f.path.clone()).or_default();
        let end = f.cursor + data.len();
        if contents.len() < end {
            contents.resize(end, 0);
        }
        contents[f.cursor..end].copy_from_slice(data);
        f.cursor = end;
        self.mutations += 1;
        Ok(data.len())
    }

    pub fn close(&mut self, fd: u64) -> Result<(), KernelError> {
        let fd = u32::try_from(fd).map_err(|_| KernelError::FsBadDescriptor)?;
        self.descriptors
            .remove(&fd)
            .map(|_| ())
            .ok_or(KernelError::FsBadDescriptor)
    }
}
