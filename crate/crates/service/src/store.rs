//! Users, sessions, folders and files. Metadata lives in SQLite; file
//! contents live on disk under `files/`, keyed by file id.
//!
//! Every folder and file belongs to one user and carries its full path from
//! that user's root as its url, e.g. `/hw1/map.sp`. A parent of `None` means
//! the root.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use rusqlite::{params, Connection, OptionalExtension, Transaction};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub type UserId = i64;
pub type FolderId = i64;
pub type FileId = i64;

const HASH_ROUNDS: u32 = 10_000;

const SCHEMA: &str = "
CREATE TABLE IF NOT EXISTS users (
    id INTEGER PRIMARY KEY,
    username TEXT NOT NULL UNIQUE,
    salt TEXT NOT NULL,
    credential_hash TEXT NOT NULL,
    created_at INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS sessions (
    token TEXT PRIMARY KEY,
    user_id INTEGER NOT NULL REFERENCES users(id) ON DELETE CASCADE,
    expires_at INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS folders (
    id INTEGER PRIMARY KEY,
    owner INTEGER NOT NULL REFERENCES users(id) ON DELETE CASCADE,
    parent INTEGER REFERENCES folders(id) ON DELETE CASCADE,
    name TEXT NOT NULL,
    url TEXT NOT NULL,
    UNIQUE (owner, url)
);
CREATE TABLE IF NOT EXISTS files (
    id INTEGER PRIMARY KEY,
    owner INTEGER NOT NULL REFERENCES users(id) ON DELETE CASCADE,
    folder INTEGER REFERENCES folders(id) ON DELETE CASCADE,
    name TEXT NOT NULL,
    url TEXT NOT NULL,
    shared INTEGER NOT NULL DEFAULT 0,
    share_token TEXT UNIQUE,
    UNIQUE (owner, url)
);
";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("the username `{0}` is taken")]
    DuplicateUser(String),
    #[error("unknown username or wrong password")]
    BadCredentials,
    #[error("the session is missing, unknown or expired")]
    InvalidSession,
    #[error("no such {0}")]
    NotFound(&'static str),
    #[error("`{0}` already exists")]
    NameCollision(String),
    #[error("this belongs to another user")]
    NotAuthorized,
    #[error("invalid name `{0}`")]
    InvalidName(String),
    #[error("database error: {0}")]
    Database(#[from] rusqlite::Error),
    #[error("file system error: {0}")]
    Io(#[from] std::io::Error),
}

pub type StoreResult<T> = Result<T, StoreError>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FolderInfo {
    pub id: FolderId,
    pub parent: Option<FolderId>,
    pub name: String,
    pub url: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FileInfo {
    pub id: FileId,
    pub folder: Option<FolderId>,
    pub name: String,
    pub url: String,
    pub shared: bool,
}

/// A folder with its contents, children sorted by name.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TreeNode {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<FolderId>,
    pub name: String,
    pub url: String,
    pub folders: Vec<TreeNode>,
    pub files: Vec<FileInfo>,
}

impl TreeNode {
    /// Every url in the tree, folders before their contents.
    pub fn urls(&self) -> Vec<String> {
        let mut out = Vec::new();
        for f in &self.folders {
            out.push(f.url.clone());
            out.extend(f.urls());
        }
        out.extend(self.files.iter().map(|f| f.url.clone()));
        out
    }
}

pub struct Store {
    conn: Mutex<Connection>,
    files_dir: PathBuf,
    session_ttl: Duration,
}

fn now_millis() -> i64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as i64)
}

fn hash_password(salt: &str, password: &str) -> String {
    let mut digest = Sha256::new().chain_update(salt).chain_update(password).finalize();
    for _ in 1..HASH_ROUNDS {
        digest = Sha256::new().chain_update(digest).chain_update(password).finalize();
    }
    hex::encode(digest)
}

fn same_bytes(a: &[u8], b: &[u8]) -> bool {
    a.len() == b.len() && a.iter().zip(b).fold(0u8, |acc, (x, y)| acc | (x ^ y)) == 0
}

fn check_name(name: &str) -> StoreResult<()> {
    if name.is_empty() || name == "." || name == ".." || name.contains(['/', '\\', '\0']) {
        return Err(StoreError::InvalidName(name.to_string()));
    }
    Ok(())
}

fn child_url(parent_url: &str, name: &str) -> String {
    if parent_url == "/" {
        format!("/{name}")
    } else {
        format!("{parent_url}/{name}")
    }
}

fn token() -> String {
    uuid::Uuid::new_v4().simple().to_string()
}

/// Writes `bytes` to `path` through a synced temporary file and a rename.
fn write_durably(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    fs::rename(&tmp, path)?;
    if let Some(dir) = path.parent() {
        let _ = fs::File::open(dir).and_then(|d| d.sync_all());
    }
    Ok(())
}

impl Store {
    /// Opens or creates the store in `data_dir`.
    pub fn open(data_dir: &Path, session_ttl: Duration) -> StoreResult<Store> {
        let files_dir = data_dir.join("files");
        fs::create_dir_all(&files_dir)?;
        let conn = Connection::open(data_dir.join("workspace.sqlite3"))?;
        conn.execute_batch("PRAGMA foreign_keys = ON; PRAGMA journal_mode = WAL; PRAGMA synchronous = FULL;")?;
        conn.execute_batch(SCHEMA)?;
        Ok(Store {
            conn: Mutex::new(conn),
            files_dir,
            session_ttl,
        })
    }

    fn with<T>(&self, f: impl FnOnce(&mut Connection) -> StoreResult<T>) -> StoreResult<T> {
        let mut conn = self.conn.lock().unwrap_or_else(|p| p.into_inner());
        f(&mut conn)
    }

    fn content_path(&self, id: FileId) -> PathBuf {
        self.files_dir.join(id.to_string())
    }

    // ------------------------------------------------------------ accounts

    pub fn register(&self, username: &str, password: &str) -> StoreResult<UserId> {
        if username.trim().is_empty() {
            return Err(StoreError::InvalidName(username.to_string()));
        }
        let salt = token();
        let hash = hash_password(&salt, password);
        self.with(|c| {
            let inserted = c.execute(
                "INSERT INTO users (username, salt, credential_hash, created_at) VALUES (?1, ?2, ?3, ?4)
                 ON CONFLICT (username) DO NOTHING",
                params![username, salt, hash, now_millis()],
            )?;
            if inserted == 0 {
                return Err(StoreError::DuplicateUser(username.to_string()));
            }
            Ok(c.last_insert_rowid())
        })
    }

    /// A fresh session token for valid credentials.
    pub fn login(&self, username: &str, password: &str) -> StoreResult<String> {
        self.with(|c| {
            let row: Option<(UserId, String, String)> = c
                .query_row(
                    "SELECT id, salt, credential_hash FROM users WHERE username = ?1",
                    [username],
                    |r| Ok((r.get(0)?, r.get(1)?, r.get(2)?)),
                )
                .optional()?;
            let Some((id, salt, stored)) = row else {
                return Err(StoreError::BadCredentials);
            };
            if !same_bytes(hash_password(&salt, password).as_bytes(), stored.as_bytes()) {
                return Err(StoreError::BadCredentials);
            }
            let t = token();
            let expires = now_millis() + self.session_ttl.as_millis() as i64;
            c.execute("DELETE FROM sessions WHERE expires_at <= ?1", [now_millis()])?;
            c.execute("INSERT INTO sessions (token, user_id, expires_at) VALUES (?1, ?2, ?3)", params![t, id, expires])?;
            Ok(t)
        })
    }

    pub fn logout(&self, token: &str) -> StoreResult<()> {
        self.with(|c| {
            match c.execute("DELETE FROM sessions WHERE token = ?1", [token])? {
                0 => Err(StoreError::InvalidSession),
                _ => Ok(()),
            }
        })
    }

    /// The user owning an unexpired session.
    pub fn session_user(&self, token: &str) -> StoreResult<UserId> {
        self.with(|c| {
            c.query_row(
                "SELECT user_id FROM sessions WHERE token = ?1 AND expires_at > ?2",
                params![token, now_millis()],
                |r| r.get(0),
            )
            .optional()?
            .ok_or(StoreError::InvalidSession)
        })
    }

    // ------------------------------------------------------------ tree

    fn folder_row(tx: &Transaction<'_>, id: FolderId) -> StoreResult<(UserId, FolderInfo)> {
        tx.query_row("SELECT owner, parent, name, url FROM folders WHERE id = ?1", [id], |r| {
            Ok((
                r.get(0)?,
                FolderInfo {
                    id,
                    parent: r.get(1)?,
                    name: r.get(2)?,
                    url: r.get(3)?,
                },
            ))
        })
        .optional()?
        .ok_or(StoreError::NotFound("folder"))
    }

    fn owned_folder(tx: &Transaction<'_>, user: UserId, id: FolderId) -> StoreResult<FolderInfo> {
        let (owner, info) = Self::folder_row(tx, id)?;
        if owner != user {
            return Err(StoreError::NotAuthorized);
        }
        Ok(info)
    }

    fn file_row(tx: &Transaction<'_>, id: FileId) -> StoreResult<(UserId, FileInfo)> {
        tx.query_row("SELECT owner, folder, name, url, shared FROM files WHERE id = ?1", [id], |r| {
            Ok((
                r.get(0)?,
                FileInfo {
                    id,
                    folder: r.get(1)?,
                    name: r.get(2)?,
                    url: r.get(3)?,
                    shared: r.get(4)?,
                },
            ))
        })
        .optional()?
        .ok_or(StoreError::NotFound("file"))
    }

    fn owned_file(tx: &Transaction<'_>, user: UserId, id: FileId) -> StoreResult<FileInfo> {
        let (owner, info) = Self::file_row(tx, id)?;
        if owner != user {
            return Err(StoreError::NotAuthorized);
        }
        Ok(info)
    }

    fn parent_url(tx: &Transaction<'_>, user: UserId, parent: Option<FolderId>) -> StoreResult<String> {
        match parent {
            None => Ok("/".to_string()),
            Some(id) => Ok(Self::owned_folder(tx, user, id)?.url),
        }
    }

    fn ensure_free(tx: &Transaction<'_>, user: UserId, url: &str) -> StoreResult<()> {
        let taken: bool = tx.query_row(
            "SELECT EXISTS (SELECT 1 FROM folders WHERE owner = ?1 AND url = ?2)
                 OR EXISTS (SELECT 1 FROM files WHERE owner = ?1 AND url = ?2)",
            params![user, url],
            |r| r.get(0),
        )?;
        if taken {
            return Err(StoreError::NameCollision(url.to_string()));
        }
        Ok(())
    }

    pub fn create_folder(&self, user: UserId, parent: Option<FolderId>, name: &str) -> StoreResult<FolderInfo> {
        check_name(name)?;
        self.with(|c| {
            let tx = c.transaction()?;
            let url = child_url(&Self::parent_url(&tx, user, parent)?, name);
            Self::ensure_free(&tx, user, &url)?;
            tx.execute(
                "INSERT INTO folders (owner, parent, name, url) VALUES (?1, ?2, ?3, ?4)",
                params![user, parent, name, url],
            )?;
            let id = tx.last_insert_rowid();
            tx.commit()?;
            Ok(FolderInfo {
                id,
                parent,
                name: name.to_string(),
                url,
            })
        })
    }

    pub fn create_file(&self, user: UserId, folder: Option<FolderId>, name: &str, content: &str) -> StoreResult<FileInfo> {
        check_name(name)?;
        self.with(|c| {
            let tx = c.transaction()?;
            let url = child_url(&Self::parent_url(&tx, user, folder)?, name);
            Self::ensure_free(&tx, user, &url)?;
            tx.execute(
                "INSERT INTO files (owner, folder, name, url) VALUES (?1, ?2, ?3, ?4)",
                params![user, folder, name, url],
            )?;
            let id = tx.last_insert_rowid();
            write_durably(&self.content_path(id), content.as_bytes())?;
            tx.commit()?;
            Ok(FileInfo {
                id,
                folder,
                name: name.to_string(),
                url,
                shared: false,
            })
        })
    }

    pub fn read_file(&self, user: UserId, id: FileId) -> StoreResult<(FileInfo, String)> {
        let info = self.with(|c| {
            let tx = c.transaction()?;
            Self::owned_file(&tx, user, id)
        })?;
        let content = fs::read_to_string(self.content_path(id))?;
        Ok((info, content))
    }

    /// Replaces the content of a file. Returns once the bytes are on disk.
    pub fn save_file(&self, user: UserId, id: FileId, content: &str) -> StoreResult<FileInfo> {
        self.with(|c| {
            let tx = c.transaction()?;
            let info = Self::owned_file(&tx, user, id)?;
            write_durably(&self.content_path(id), content.as_bytes())?;
            Ok(info)
        })
    }

    pub fn rename_file(&self, user: UserId, id: FileId, name: &str) -> StoreResult<FileInfo> {
        check_name(name)?;
        self.with(|c| {
            let tx = c.transaction()?;
            let mut info = Self::owned_file(&tx, user, id)?;
            let url = child_url(&Self::parent_url(&tx, user, info.folder)?, name);
            if url != info.url {
                Self::ensure_free(&tx, user, &url)?;
            }
            tx.execute("UPDATE files SET name = ?1, url = ?2 WHERE id = ?3", params![name, url, id])?;
            tx.commit()?;
            info.name = name.to_string();
            info.url = url;
            Ok(info)
        })
    }

    /// Renames a folder and rewrites the urls of everything below it.
    pub fn rename_folder(&self, user: UserId, id: FolderId, name: &str) -> StoreResult<FolderInfo> {
        check_name(name)?;
        self.with(|c| {
            let tx = c.transaction()?;
            let mut info = Self::owned_folder(&tx, user, id)?;
            let url = child_url(&Self::parent_url(&tx, user, info.parent)?, name);
            if url != info.url {
                Self::ensure_free(&tx, user, &url)?;
                let prefix = format!("{}/", info.url);
                for table in ["folders", "files"] {
                    tx.execute(
                        &format!(
                            "UPDATE {table} SET url = ?1 || substr(url, ?2)
                             WHERE owner = ?3 AND substr(url, 1, ?4) = ?5"
                        ),
                        params![url, info.url.chars().count() as i64 + 1, user, prefix.chars().count() as i64, prefix],
                    )?;
                }
                tx.execute("UPDATE folders SET name = ?1, url = ?2 WHERE id = ?3", params![name, url, id])?;
            }
            tx.commit()?;
            info.name = name.to_string();
            info.url = url;
            Ok(info)
        })
    }

    pub fn delete_file(&self, user: UserId, id: FileId) -> StoreResult<()> {
        self.with(|c| {
            let tx = c.transaction()?;
            Self::owned_file(&tx, user, id)?;
            tx.execute("DELETE FROM files WHERE id = ?1", [id])?;
            tx.commit()?;
            Ok(())
        })?;
        remove_if_present(&self.content_path(id))
    }

    /// Deletes a folder with everything below it.
    pub fn delete_folder(&self, user: UserId, id: FolderId) -> StoreResult<()> {
        let doomed: Vec<FileId> = self.with(|c| {
            let tx = c.transaction()?;
            let info = Self::owned_folder(&tx, user, id)?;
            let prefix = format!("{}/", info.url);
            let ids = {
                let mut stmt = tx.prepare("SELECT id FROM files WHERE owner = ?1 AND substr(url, 1, ?2) = ?3")?;
                let rows = stmt.query_map(params![user, prefix.chars().count() as i64, prefix], |r| r.get(0))?;
                rows.collect::<Result<Vec<FileId>, _>>()?
            };
            tx.execute("DELETE FROM folders WHERE id = ?1", [id])?;
            tx.commit()?;
            Ok(ids)
        })?;
        for f in doomed {
            remove_if_present(&self.content_path(f))?;
        }
        Ok(())
    }

    /// Marks a file shared and returns its read-only token.
    pub fn share_file(&self, user: UserId, id: FileId) -> StoreResult<String> {
        self.with(|c| {
            let tx = c.transaction()?;
            Self::owned_file(&tx, user, id)?;
            let existing: Option<String> = tx.query_row("SELECT share_token FROM files WHERE id = ?1", [id], |r| r.get(0))?;
            let t = match existing {
                Some(t) => t,
                None => {
                    let t = token();
                    tx.execute("UPDATE files SET shared = 1, share_token = ?1 WHERE id = ?2", params![t, id])?;
                    t
                }
            };
            tx.commit()?;
            Ok(t)
        })
    }

    pub fn read_shared(&self, share_token: &str) -> StoreResult<(FileInfo, String)> {
        let id: FileId = self.with(|c| {
            c.query_row("SELECT id FROM files WHERE share_token = ?1 AND shared = 1", [share_token], |r| r.get(0))
                .optional()?
                .ok_or(StoreError::NotFound("shared file"))
        })?;
        let info = self.with(|c| {
            let tx = c.transaction()?;
            Ok(Self::file_row(&tx, id)?.1)
        })?;
        let content = fs::read_to_string(self.content_path(id))?;
        Ok((info, content))
    }

    fn folders_of(c: &Connection, user: UserId) -> StoreResult<Vec<FolderInfo>> {
        let mut stmt = c.prepare("SELECT id, parent, name, url FROM folders WHERE owner = ?1 ORDER BY name")?;
        let rows = stmt.query_map([user], |r| {
            Ok(FolderInfo {
                id: r.get(0)?,
                parent: r.get(1)?,
                name: r.get(2)?,
                url: r.get(3)?,
            })
        })?;
        Ok(rows.collect::<Result<_, _>>()?)
    }

    fn files_of(c: &Connection, user: UserId) -> StoreResult<Vec<FileInfo>> {
        let mut stmt = c.prepare("SELECT id, folder, name, url, shared FROM files WHERE owner = ?1 ORDER BY name")?;
        let rows = stmt.query_map([user], |r| {
            Ok(FileInfo {
                id: r.get(0)?,
                folder: r.get(1)?,
                name: r.get(2)?,
                url: r.get(3)?,
                shared: r.get(4)?,
            })
        })?;
        Ok(rows.collect::<Result<_, _>>()?)
    }

    /// The user's whole tree.
    pub fn tree(&self, user: UserId) -> StoreResult<TreeNode> {
        let (folders, files) = self.with(|c| Ok((Self::folders_of(c, user)?, Self::files_of(c, user)?)))?;
        fn build(id: Option<FolderId>, name: &str, url: &str, folders: &[FolderInfo], files: &[FileInfo]) -> TreeNode {
            TreeNode {
                id,
                name: name.to_string(),
                url: url.to_string(),
                folders: folders
                    .iter()
                    .filter(|f| f.parent == id)
                    .map(|f| build(Some(f.id), &f.name, &f.url, folders, files))
                    .collect(),
                files: files.iter().filter(|f| f.folder == id).cloned().collect(),
            }
        }
        Ok(build(None, "", "/", &folders, &files))
    }

    /// Checks that every stored url equals the path through its parents.
    pub fn check_integrity(&self, user: UserId) -> StoreResult<Vec<String>> {
        let (folders, files) = self.with(|c| Ok((Self::folders_of(c, user)?, Self::files_of(c, user)?)))?;
        let path_of = |mut parent: Option<FolderId>, name: &str| -> Option<String> {
            let mut parts = vec![name.to_string()];
            let mut steps = 0;
            while let Some(id) = parent {
                let f = folders.iter().find(|f| f.id == id)?;
                parts.push(f.name.clone());
                parent = f.parent;
                steps += 1;
                if steps > folders.len() {
                    return None;
                }
            }
            parts.reverse();
            Some(format!("/{}", parts.join("/")))
        };
        let mut problems = Vec::new();
        for f in &folders {
            if path_of(f.parent, &f.name).as_deref() != Some(f.url.as_str()) {
                problems.push(f.url.clone());
            }
        }
        for f in &files {
            if path_of(f.folder, &f.name).as_deref() != Some(f.url.as_str()) {
                problems.push(f.url.clone());
            }
        }
        Ok(problems)
    }

    /// Every file of the user as `(url without the leading slash, content)`.
    pub fn workspace_files(&self, user: UserId) -> StoreResult<Vec<(String, String)>> {
        let files = self.with(|c| Self::files_of(c, user))?;
        let mut out = Vec::with_capacity(files.len());
        for f in files {
            let content = fs::read_to_string(self.content_path(f.id))?;
            out.push((f.url.trim_start_matches('/').to_string(), content));
        }
        Ok(out)
    }
}

fn remove_if_present(path: &Path) -> StoreResult<()> {
    match fs::remove_file(path) {
        Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(e.into()),
        _ => Ok(()),
    }
}
