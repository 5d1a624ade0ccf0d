use std::collections::VecDeque;
use std::path::{Path, PathBuf};
use std::process::Command;

use chrono::{DateTime, SecondsFormat, Utc};

use super::{count_changed_lines, CommitRecord, CorpusError};
use crate::diff::parse_unified_diff;

#[derive(Debug, Clone, Default)]
pub struct HistoryOptions {
    /// Defaults to `HEAD`.
    pub branch: Option<String>,
    /// Only commits whose committer date is at or after this instant.
    pub since: Option<DateTime<Utc>>,
}

fn git(repo: &Path, args: &[&str]) -> Result<String, CorpusError> {
    let output = Command::new("git")
        .arg("-C")
        .arg(repo)
        .args(["-c", "color.ui=never", "-c", "core.quotepath=true"])
        .args(args)
        .env("LC_ALL", "C")
        .output()
        .map_err(CorpusError::GitUnavailable)?;
    if !output.status.success() {
        return Err(CorpusError::Git {
            command: args.join(" "),
            stderr: String::from_utf8_lossy(&output.stderr).trim().to_string(),
        });
    }
    Ok(String::from_utf8_lossy(&output.stdout).into_owned())
}

/// `owner/name` from a remote URL, or the last path component.
fn full_name(url: &str) -> String {
    let trimmed = url.trim_end_matches('/').trim_end_matches(".git");
    let parts: Vec<&str> = trimmed.rsplit(['/', ':']).filter(|p| !p.is_empty()).take(2).collect();
    match parts.as_slice() {
        [name, owner] if !url.starts_with("file://") && !url.starts_with('/') => format!("{owner}/{name}"),
        [name, ..] => name.to_string(),
        [] => String::new(),
    }
}

/// Commits of one branch, newest first, read lazily one `git` call at a time.
pub struct GitHistory {
    repo: PathBuf,
    git_url: String,
    repo_full_name: String,
    pending: VecDeque<String>,
}

impl GitHistory {
    pub fn remaining(&self) -> usize {
        self.pending.len()
    }

    fn read(&self, sha: &str) -> Result<CommitRecord, CorpusError> {
        let header = git(&self.repo, &["show", "-s", "--format=%H%x00%P%x00%an%x00%cI%x00%B", sha])?;
        let fields: Vec<&str> = header.splitn(5, '\0').collect();
        let [full_sha, parents, author, date, message] = fields[..] else {
            return Err(CorpusError::GitOutput { sha: sha.into(), detail: "short header".into() });
        };
        let timestamp = DateTime::parse_from_rfc3339(date)
            .map_err(|e| CorpusError::GitOutput { sha: sha.into(), detail: format!("date `{date}`: {e}") })?
            .with_timezone(&Utc)
            .to_rfc3339_opts(SecondsFormat::Secs, true);

        let prefixes = ["--src-prefix=a/", "--dst-prefix=b/", "--no-ext-diff", "-M"];
        let diff = match parents.split_whitespace().next() {
            Some(first) => git(&self.repo, &[&["diff"][..], &prefixes, &[first, full_sha]].concat())?,
            None => git(
                &self.repo,
                &[&["diff-tree", "-p", "--root", "--no-commit-id"][..], &prefixes, &[full_sha]].concat(),
            )?,
        };
        let mut changed_files: Vec<String> = match parse_unified_diff(&diff) {
            Ok(segments) => segments.iter().filter_map(|s| s.path().map(str::to_string)).collect(),
            Err(_) => Vec::new(),
        };
        changed_files.dedup();
        Ok(CommitRecord {
            git_url: self.git_url.clone(),
            repo_full_name: self.repo_full_name.clone(),
            sha: full_sha.to_string(),
            author: author.to_string(),
            message: message.trim_end_matches('\n').to_string(),
            loc_changed: count_changed_lines(&diff),
            diff,
            changed_files,
            timestamp,
        })
    }
}

impl Iterator for GitHistory {
    type Item = Result<CommitRecord, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        let sha = self.pending.pop_front()?;
        Some(self.read(&sha))
    }
}

/// Every commit reachable from the branch, diffed against its first parent
/// (the root commit against the empty tree).
pub fn read_git_history(repo: &Path, options: &HistoryOptions) -> Result<GitHistory, CorpusError> {
    if git(repo, &["rev-parse", "--git-dir"]).is_err() {
        return Err(CorpusError::NotARepository(repo.display().to_string()));
    }
    let branch = options.branch.as_deref().unwrap_or("HEAD");
    if git(repo, &["rev-parse", "--verify", "--quiet", &format!("{branch}^{{commit}}")]).is_err() {
        return Err(CorpusError::MissingBranch(branch.to_string()));
    }
    let mut args = vec!["rev-list".to_string()];
    if let Some(since) = options.since {
        args.push(format!("--max-age={}", since.timestamp()));
    }
    args.push(branch.to_string());
    args.push("--".to_string());
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let pending = git(repo, &args)?.lines().map(str::to_string).collect();

    let git_url = match git(repo, &["config", "--get", "remote.origin.url"]) {
        Ok(url) if !url.trim().is_empty() => url.trim().to_string(),
        _ => {
            let top = git(repo, &["rev-parse", "--show-toplevel"]).map(|s| s.trim().to_string());
            format!("file://{}", top.unwrap_or_else(|_| repo.display().to_string()))
        }
    };
    Ok(GitHistory { repo: repo.to_path_buf(), repo_full_name: full_name(&git_url), git_url, pending })
}
