//! Rating-file ingestion: parsing, binarization and id densification.
//!
//! Raw files carry `user<delim>item<delim>rating<delim>timestamp` lines
//! (MovieLens uses `::`). Ratings of exactly five stars become positives;
//! everything else is kept with rating 0 and dropped by [`positives`] before
//! splitting.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::Interaction;

pub const DEFAULT_DELIMITER: &str = "::";

/// One parsed line of a raw rating file.
#[derive(Clone, Debug, PartialEq)]
pub struct RawRecord {
    pub user: String,
    pub item: String,
    pub rating: f64,
    pub timestamp: i64,
}

pub fn parse_file(path: impl AsRef<Path>, delimiter: &str) -> Result<Vec<RawRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_str(&text, delimiter)
}

/// Parses raw records from text. Blank lines are skipped; any malformed
/// line aborts with its 1-based line number.
pub fn parse_str(text: &str, delimiter: &str) -> Result<Vec<RawRecord>> {
    if delimiter.is_empty() {
        return Err(Error::config("delimiter must not be empty"));
    }
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(delimiter).collect();
        if fields.len() < 4 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 4 fields, found {}", fields.len()),
            });
        }
        let user = fields[0].trim();
        let item = fields[1].trim();
        if user.is_empty() || item.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: "empty user or item token".into(),
            });
        }
        let rating: f64 = fields[2].trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("rating '{}' is not a number", fields[2]),
        })?;
        if !(0.5..=5.0).contains(&rating) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("rating {rating} outside [0.5, 5]"),
            });
        }
        let timestamp: i64 = fields[3].trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("timestamp '{}' is not an integer", fields[3]),
        })?;
        if timestamp < 0 {
            return Err(Error::Parse {
                line: line_no,
                message: "negative timestamp".into(),
            });
        }
        out.push(RawRecord {
            user: user.to_string(),
            item: item.to_string(),
            rating,
            timestamp,
        });
    }
    Ok(out)
}

/// Renders records back to the raw text format.
pub fn serialize_records(records: &[RawRecord], delimiter: &str) -> String {
    let mut s = String::new();
    for r in records {
        let _ = writeln!(
            s,
            "{}{d}{}{d}{}{d}{}",
            r.user,
            r.item,
            r.rating,
            r.timestamp,
            d = delimiter
        );
    }
    s
}

/// Bidirectional raw-token ↔ dense-id mapping, assigned in first-seen order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IdMap {
    users: Vec<String>,
    items: Vec<String>,
    user_ids: HashMap<String, u32>,
    item_ids: HashMap<String, u32>,
}

#[derive(Serialize, Deserialize)]
struct IdMapFile {
    users: BTreeMap<String, u32>,
    items: BTreeMap<String, u32>,
}

impl IdMap {
    pub fn user_id(&mut self, raw: &str) -> u32 {
        intern(&mut self.users, &mut self.user_ids, raw)
    }

    pub fn item_id(&mut self, raw: &str) -> u32 {
        intern(&mut self.items, &mut self.item_ids, raw)
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn num_items(&self) -> usize {
        self.items.len()
    }

    pub fn raw_user(&self, id: u32) -> Option<&str> {
        self.users.get(id as usize).map(String::as_str)
    }

    pub fn raw_item(&self, id: u32) -> Option<&str> {
        self.items.get(id as usize).map(String::as_str)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = IdMapFile {
            users: self.user_ids.iter().map(|(k, v)| (k.clone(), *v)).collect(),
            items: self.item_ids.iter().map(|(k, v)| (k.clone(), *v)).collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: IdMapFile = serde_json::from_str(text)?;
        let rebuild = |m: BTreeMap<String, u32>| -> Result<(Vec<String>, HashMap<String, u32>)> {
            let mut dense = vec![None; m.len()];
            for (raw, id) in &m {
                let slot = dense.get_mut(*id as usize).ok_or_else(|| {
                    Error::config(format!("id map is not dense: id {id} of {}", m.len()))
                })?;
                *slot = Some(raw.clone());
            }
            let dense = dense
                .into_iter()
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::config("id map has duplicate ids"))?;
            Ok((dense, m.into_iter().collect()))
        };
        let (users, user_ids) = rebuild(file.users)?;
        let (items, item_ids) = rebuild(file.items)?;
        Ok(IdMap {
            users,
            items,
            user_ids,
            item_ids,
        })
    }
}

fn intern(dense: &mut Vec<String>, ids: &mut HashMap<String, u32>, raw: &str) -> u32 {
    if let Some(&id) = ids.get(raw) {
        return id;
    }
    let id = dense.len() as u32;
    dense.push(raw.to_string());
    ids.insert(raw.to_string(), id);
    id
}

/// A batch of interactions that has been binarized exactly once.
#[derive(Clone, Debug, PartialEq)]
pub struct Binarized {
    pub interactions: Vec<Interaction>,
    pub ids: IdMap,
}

/// Maps five-star ratings to 1 and everything else to 0, densifying ids.
///
/// Output order and length match the input.
pub fn binarize(records: &[RawRecord]) -> Binarized {
    let mut ids = IdMap::default();
    let interactions = records
        .iter()
        .map(|r| Interaction {
            user: ids.user_id(&r.user),
            item: ids.item_id(&r.item),
            rating: u8::from(r.rating == 5.0),
            timestamp: r.timestamp,
        })
        .collect();
    Binarized { interactions, ids }
}

/// Keeps rating-1 interactions, collapsing duplicate (user, item) pairs onto
/// their earliest timestamp. Output is sorted by (user, item).
pub fn positives(interactions: &[Interaction]) -> Vec<Interaction> {
    let mut earliest: BTreeMap<(u32, u32), i64> = BTreeMap::new();
    for x in interactions.iter().filter(|x| x.rating == 1) {
        earliest
            .entry(x.pair())
            .and_modify(|t| *t = (*t).min(x.timestamp))
            .or_insert(x.timestamp);
    }
    earliest
        .into_iter()
        .map(|((user, item), timestamp)| Interaction::positive(user, item, timestamp))
        .collect()
}

/// Writes the canonical `user\titem\trating\ttimestamp` format.
pub fn write_interactions(path: impl AsRef<Path>, xs: &[Interaction]) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for x in xs {
        writeln!(w, "{}\t{}\t{}\t{}", x.user, x.item, x.rating, x.timestamp)
            .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_interactions(path: impl AsRef<Path>) -> Result<Vec<Interaction>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_interactions(&text)
}

pub fn parse_interactions(text: &str) -> Result<Vec<Interaction>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |what: &str| Error::Parse {
            line: idx + 1,
            message: format!("bad {what} field"),
        };
        let mut f = line.split('\t');
        let user = f.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("user"))?;
        let item = f.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("item"))?;
        let rating: u8 = f.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("rating"))?;
        if rating > 1 {
            return Err(bad("rating"));
        }
        let timestamp = f
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("timestamp"))?;
        out.push(Interaction {
            user,
            item,
            rating,
            timestamp,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_movielens_line() {
        let recs = parse_str("1::32::5::838985522\n", "::").unwrap();
        assert_eq!(
            recs,
            vec![RawRecord {
                user: "1".into(),
                item: "32".into(),
                rating: 5.0,
                timestamp: 838985522,
            }]
        );
    }

    #[test]
    fn empty_input_gives_empty_list() {
        assert!(parse_str("", "::").unwrap().is_empty());
        assert!(binarize(&[]).interactions.is_empty());
    }

    #[test]
    fn non_numeric_rating_fails_with_line_number() {
        let err = parse_str("1::32::five::0", "::").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_str("1::2::5::0\n\n1::3", "::").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn binarize_keeps_only_five_stars() {
        let recs = parse_str("a,x,5,1\na,y,4.5,2\nb,x,5.0,3\n", ",").unwrap();
        let b = binarize(&recs);
        let ratings: Vec<u8> = b.interactions.iter().map(|x| x.rating).collect();
        assert_eq!(ratings, vec![1, 0, 1]);
        assert_eq!(b.ids.num_users(), 2);
        assert_eq!(b.ids.num_items(), 2);
        // first-seen order
        assert_eq!(b.interactions[2].user, 1);
        assert_eq!(b.interactions[2].item, 0);
    }

    #[test]
    fn positives_drop_zeros_and_keep_earliest_duplicate() {
        let xs = vec![
            Interaction { user: 0, item: 1, rating: 1, timestamp: 9 },
            Interaction { user: 0, item: 1, rating: 1, timestamp: 4 },
            Interaction { user: 0, item: 2, rating: 0, timestamp: 1 },
        ];
        assert_eq!(positives(&xs), vec![Interaction::positive(0, 1, 4)]);
    }

    #[test]
    fn id_map_json_round_trips() {
        let recs = parse_str("u9::m1::5::0\nu3::m1::2::1\n", "::").unwrap();
        let b = binarize(&recs);
        let back = IdMap::from_json(&b.ids.to_json().unwrap()).unwrap();
        assert_eq!(back, b.ids);
        assert_eq!(back.raw_user(1), Some("u3"));
    }

    proptest! {
        #[test]
        fn parse_serialize_round_trip(
            rows in prop::collection::vec(
                ("[a-z0-9]{1,6}", "[a-z0-9]{1,6}", 1u32..=10, 0i64..2_000_000_000),
                0..30,
            )
        ) {
            let records: Vec<RawRecord> = rows
                .into_iter()
                .map(|(u, i, half_stars, ts)| RawRecord {
                    user: u,
                    item: i,
                    rating: half_stars as f64 / 2.0,
                    timestamp: ts,
                })
                .collect();
            let text = serialize_records(&records, "::");
            prop_assert_eq!(parse_str(&text, "::").unwrap(), records);
        }

        #[test]
        fn binarize_preserves_length_and_is_binary(
            ratings in prop::collection::vec(1u32..=10, 0..50)
        ) {
            let records: Vec<RawRecord> = ratings
                .iter()
                .enumerate()
                .map(|(k, r)| RawRecord {
                    user: (k % 7).to_string(),
                    item: (k % 5).to_string(),
                    rating: *r as f64 / 2.0,
                    timestamp: k as i64,
                })
                .collect();
            let b = binarize(&records);
            prop_assert_eq!(b.interactions.len(), records.len());
            for (x, r) in b.interactions.iter().zip(&records) {
                prop_assert!(x.rating <= 1);
                prop_assert_eq!(x.rating == 1, r.rating == 5.0);
            }
        }
    }
}
