use std::path::{Path, PathBuf};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub image: PathBuf,
    pub masks: PathBuf,
    pub label: Option<usize>,
}

impl Instance {
    /// Identifier used in reports: the image path as written in the list.
    pub fn name(&self) -> String {
        self.image.display().to_string()
    }
}

/// Parses a dataset list: one `image masks [label]` entry per line,
/// whitespace separated. Blank lines and lines starting with `#` are
/// skipped. Relative paths are resolved against `base`.
pub fn parse_dataset(text: &str, base: &Path) -> Result<Vec<Instance>, CliError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = |m: &str| CliError::Config(format!("dataset line {}: {m}", n + 1));
        let (image, masks, label) = match fields.as_slice() {
            [i, m] => (i, m, None),
            [i, m, l] => (i, m, Some(l.parse::<usize>().map_err(|_| bad("label must be a class index"))?)),
            _ => return Err(bad("expected `image masks [label]`")),
        };
        out.push(Instance {
            image: base.join(image),
            masks: base.join(masks),
            label,
        });
    }
    if out.is_empty() {
        return Err(CliError::Config("dataset list has no entries".into()));
    }
    Ok(out)
}

pub fn load_dataset(path: &Path) -> Result<Vec<Instance>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_dataset(&text, path.parent().unwrap_or(Path::new("")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_entries() {
        let text = "# comment\n\na.png a.json\n/abs/b.png b.json 3\n";
        let d = parse_dataset(text, Path::new("/data")).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d[0].image, PathBuf::from("/data/a.png"));
        assert_eq!(d[0].label, None);
        assert_eq!(d[1].image, PathBuf::from("/abs/b.png"));
        assert_eq!(d[1].label, Some(3));
    }

    #[test]
    fn rejects_bad_lines_and_empty_lists() {
        assert!(parse_dataset("a.png\n", Path::new(".")).is_err());
        assert!(parse_dataset("a b cat\n", Path::new(".")).is_err());
        assert!(parse_dataset("# nothing\n", Path::new(".")).is_err());
    }
}
