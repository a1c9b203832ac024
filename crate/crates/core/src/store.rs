//! Flat-file persistence.
//!
//! Templates and keys live in two distinct directories:
//! `templates/<subject_id>.rec` and `keys/<subject_id>.key`. Revoked key
//! nonces are appended to `keys/revoked.log` so a re-enrollment can be checked
//! for a fresh nonce.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::quantizer::{Nonce, ReliableKey};
use crate::sketch::{validate_subject_id, EnrollmentRecord};

const REVOKED_LOG: &str = "revoked.log";

fn ensure_dir(path: &Path) -> Result<PathBuf> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))?;
    fs::canonicalize(path).map_err(|e| Error::io(path, e))
}

fn write_new(path: &Path, contents: &str, overwrite: bool, id: &str) -> Result<()> {
    if !overwrite && path.exists() {
        return Err(Error::DuplicateSubject(id.to_owned()));
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn read_existing(path: &Path, id: &str) -> Result<String> {
    match fs::read_to_string(path) {
        Ok(s) => Ok(s),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(Error::NotFound(id.to_owned())),
        Err(e) => Err(Error::io(path, e)),
    }
}

fn remove_existing(path: &Path, id: &str) -> Result<()> {
    match fs::remove_file(path) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(Error::NotFound(id.to_owned())),
        Err(e) => Err(Error::io(path, e)),
    }
}

fn list_ids(dir: &Path, ext: &str) -> Result<Vec<String>> {
    let mut ids = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) == Some(ext) {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                ids.push(stem.to_owned());
            }
        }
    }
    ids.sort();
    Ok(ids)
}

/// Template database: one `.rec` file per subject.
#[derive(Debug, Clone)]
pub struct TemplateDb {
    dir: PathBuf,
}

impl TemplateDb {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        Ok(TemplateDb {
            dir: ensure_dir(dir.as_ref())?,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, id: &str) -> Result<PathBuf> {
        validate_subject_id(id)?;
        Ok(self.dir.join(format!("{id}.rec")))
    }

    pub fn save_record(&self, id: &str, record: &EnrollmentRecord, overwrite: bool) -> Result<()> {
        if record.subject_id != id {
            return Err(Error::InvalidParams(format!(
                "record belongs to {:?}, not {id:?}",
                record.subject_id
            )));
        }
        write_new(&self.path(id)?, &record.to_text(), overwrite, id)
    }

    pub fn load_record(&self, id: &str) -> Result<EnrollmentRecord> {
        EnrollmentRecord::from_text(&read_existing(&self.path(id)?, id)?)
    }

    pub fn contains(&self, id: &str) -> Result<bool> {
        Ok(self.path(id)?.exists())
    }

    pub fn subjects(&self) -> Result<Vec<String>> {
        list_ids(&self.dir, "rec")
    }
}

/// Matcher-local key store: one `.key` file per subject.
#[derive(Debug, Clone)]
pub struct KeyStore {
    dir: PathBuf,
}

impl KeyStore {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        Ok(KeyStore {
            dir: ensure_dir(dir.as_ref())?,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, id: &str) -> Result<PathBuf> {
        validate_subject_id(id)?;
        Ok(self.dir.join(format!("{id}.key")))
    }

    pub fn save_key(&self, id: &str, key: &ReliableKey, overwrite: bool) -> Result<()> {
        if self.revoked_nonces()?.contains(&key.nonce()) {
            return Err(Error::InvalidParams(format!(
                "nonce {} was revoked; draw a fresh one",
                key.nonce().to_hex()
            )));
        }
        write_new(&self.path(id)?, &key.to_text(), overwrite, id)
    }

    pub fn load_key(&self, id: &str) -> Result<ReliableKey> {
        ReliableKey::from_text(&read_existing(&self.path(id)?, id)?)
    }

    pub fn subjects(&self) -> Result<Vec<String>> {
        list_ids(&self.dir, "key")
    }

    pub fn revoked_nonces(&self) -> Result<HashSet<Nonce>> {
        let path = self.dir.join(REVOKED_LOG);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(HashSet::new()),
            Err(e) => return Err(Error::io(&path, e)),
        };
        text.lines()
            .filter_map(|l| l.split_whitespace().nth(1))
            .map(Nonce::from_hex)
            .collect()
    }

    fn log_revocation(&self, id: &str, nonce: Nonce) -> Result<()> {
        let path = self.dir.join(REVOKED_LOG);
        let mut f = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        writeln!(f, "{id} {}", nonce.to_hex()).map_err(|e| Error::io(&path, e))
    }
}

/// Opens both stores and rejects a layout where they share a directory.
pub fn open_stores(templates: impl AsRef<Path>, keys: impl AsRef<Path>) -> Result<(TemplateDb, KeyStore)> {
    let db = TemplateDb::open(templates)?;
    let ks = KeyStore::open(keys)?;
    if db.dir == ks.dir {
        return Err(Error::InvalidParams(
            "template database and key store must be separate directories".into(),
        ));
    }
    Ok((db, ks))
}

/// Deletes a subject's record and key and logs the key nonce as revoked.
pub fn revoke(db: &TemplateDb, keys: &KeyStore, id: &str) -> Result<()> {
    if !db.contains(id)? {
        return Err(Error::NotFound(id.to_owned()));
    }
    match keys.load_key(id) {
        Ok(key) => {
            keys.log_revocation(id, key.nonce())?;
            remove_existing(&keys.path(id)?, id)?;
        }
        Err(Error::NotFound(_)) => {}
        Err(e) => return Err(e),
    }
    remove_existing(&db.path(id)?, id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitVector;
    use crate::rs_codec::{DecodePolicy, RsCode};
    use crate::sketch::{enroll_ss, Salt};

    fn record(id: &str) -> EnrollmentRecord {
        let code = RsCode::with_m(3, 3).unwrap();
        enroll_ss(id, &BitVector::zeros(21), &code, DecodePolicy::FallbackSystematic, Salt([1; 16])).unwrap()
    }

    #[test]
    fn save_load_duplicate_revoke() {
        let tmp = tempfile::tempdir().unwrap();
        let (db, ks) = open_stores(tmp.path().join("templates"), tmp.path().join("keys")).unwrap();
        let rec = record("u1");
        let key = ReliableKey::new(vec![1, 5, 7], 10, Nonce([3; 16])).unwrap();

        db.save_record("u1", &rec, false).unwrap();
        ks.save_key("u1", &key, false).unwrap();
        assert_eq!(db.load_record("u1").unwrap(), rec);
        assert_eq!(ks.load_key("u1").unwrap(), key);
        assert!(tmp.path().join("templates/u1.rec").exists());
        assert!(tmp.path().join("keys/u1.key").exists());

        assert!(matches!(db.save_record("u1", &rec, false), Err(Error::DuplicateSubject(_))));
        db.save_record("u1", &rec, true).unwrap();
        assert!(matches!(db.load_record("u2"), Err(Error::NotFound(_))));
        assert_eq!(db.subjects().unwrap(), vec!["u1"]);

        revoke(&db, &ks, "u1").unwrap();
        assert!(matches!(db.load_record("u1"), Err(Error::NotFound(_))));
        assert!(matches!(ks.load_key("u1"), Err(Error::NotFound(_))));
        assert!(matches!(revoke(&db, &ks, "u1"), Err(Error::NotFound(_))));
        assert!(ks.revoked_nonces().unwrap().contains(&Nonce([3; 16])));
        // a revoked nonce cannot be reissued
        assert!(ks.save_key("u1", &key, false).is_err());
    }

    #[test]
    fn stores_must_be_separate() {
        let tmp = tempfile::tempdir().unwrap();
        assert!(open_stores(tmp.path(), tmp.path()).is_err());
    }

    #[test]
    fn template_files_hold_no_key_material() {
        let tmp = tempfile::tempdir().unwrap();
        let (db, _) = open_stores(tmp.path().join("t"), tmp.path().join("k")).unwrap();
        db.save_record("u9", &record("u9"), false).unwrap();
        let text = std::fs::read_to_string(tmp.path().join("t/u9.rec")).unwrap();
        let keys: Vec<&str> = text.lines().skip(1).filter_map(|l| l.split('=').next()).collect();
        assert_eq!(
            keys,
            ["version", "subject_id", "scheme", "m", "k", "poly", "policy", "salt", "digest"]
        );
    }

    #[test]
    fn rejects_path_like_ids() {
        let tmp = tempfile::tempdir().unwrap();
        let db = TemplateDb::open(tmp.path()).unwrap();
        assert!(matches!(db.load_record("../etc"), Err(Error::InvalidSubjectId(_))));
    }
}
