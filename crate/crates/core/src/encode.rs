//! Character vocabularies, one-hot vectorization and the chunked on-disk
//! sequence format.
//!
//! Every SMILES line is framed as `!` + smiles + `E`, then padded with `E`
//! to `max_len`. The network models characters, not SMILES tokens, so `Cl`
//! is two symbols here.

use std::collections::{BTreeSet, HashMap};
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use ndarray::{Array2, Array3};
use thiserror::Error;

pub const START: char = '!';
pub const END: char = 'E';

const CHUNK_MAGIC: &[u8; 4] = b"SMCH";
const CHUNK_VERSION: u16 = 1;
const VOCAB_HEADER: &str = "# smiles-vocab v1";

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("character `{ch}` in line {line} is not in the vocabulary")]
    UnknownCharacter { ch: char, line: usize },
    #[error("line {line} has {len} characters, more than the vocabulary allows ({max})")]
    TooLong { line: usize, len: usize, max: usize },
    #[error("corpus line {0} contains a reserved character (`!` or `E`)")]
    ReservedCharacter(usize),
    #[error("corrupt chunk file {path}: {reason}")]
    CorruptChunk { path: PathBuf, reason: String },
    #[error("chunk {path} was written for vocabulary {found:016x}, expected {expected:016x}")]
    VocabMismatch {
        path: PathBuf,
        expected: u64,
        found: u64,
    },
    #[error("malformed vocabulary file: {0}")]
    BadVocab(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Ordered character set with index maps and the padded sequence length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenVocab {
    chars: Vec<char>,
    index: HashMap<char, usize>,
    max_len: usize,
}

impl TokenVocab {
    pub fn new(chars: Vec<char>, max_len: usize) -> Result<TokenVocab, EncodeError> {
        let index: HashMap<char, usize> = chars.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        if index.len() != chars.len() {
            return Err(EncodeError::BadVocab("duplicate characters".into()));
        }
        if !index.contains_key(&START) || !index.contains_key(&END) {
            return Err(EncodeError::BadVocab("start or end character missing".into()));
        }
        if max_len < 2 {
            return Err(EncodeError::BadVocab("max_len below 2".into()));
        }
        Ok(TokenVocab {
            chars,
            index,
            max_len,
        })
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn index_of(&self, c: char) -> Option<usize> {
        self.index.get(&c).copied()
    }

    pub fn char_at(&self, i: usize) -> char {
        self.chars[i]
    }

    pub fn start_index(&self) -> usize {
        self.index[&START]
    }

    pub fn end_index(&self) -> usize {
        self.index[&END]
    }

    /// Longest SMILES that fits once framed.
    pub fn max_smiles_len(&self) -> usize {
        self.max_len - 2
    }

    /// Text form: a header, the padded length, then `index<TAB>char` rows.
    pub fn to_text(&self) -> String {
        let mut s = format!("{VOCAB_HEADER}\nmax_len\t{}\n", self.max_len);
        for (i, c) in self.chars.iter().enumerate() {
            s.push_str(&format!("{i}\t{c}\n"));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<TokenVocab, EncodeError> {
        let mut lines = text.lines();
        if lines.next() != Some(VOCAB_HEADER) {
            return Err(EncodeError::BadVocab("missing header".into()));
        }
        let max_len = lines
            .next()
            .and_then(|l| l.strip_prefix("max_len\t"))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| EncodeError::BadVocab("missing max_len".into()))?;
        let mut chars = Vec::new();
        for (expected, line) in lines.enumerate() {
            let (idx, ch) = line
                .split_once('\t')
                .ok_or_else(|| EncodeError::BadVocab(format!("bad row `{line}`")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| EncodeError::BadVocab(format!("bad index `{idx}`")))?;
            let mut it = ch.chars();
            let (Some(c), None) = (it.next(), it.next()) else {
                return Err(EncodeError::BadVocab(format!("bad character `{ch}`")));
            };
            if idx != expected {
                return Err(EncodeError::BadVocab("indices out of order".into()));
            }
            chars.push(c);
        }
        TokenVocab::new(chars, max_len)
    }

    pub fn save(&self, path: &Path) -> Result<(), EncodeError> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<TokenVocab, EncodeError> {
        TokenVocab::from_text(&fs::read_to_string(path)?)
    }

    /// Stable 64-bit fingerprint of the vocabulary file contents.
    pub fn hash(&self) -> u64 {
        fnv1a(self.to_text().as_bytes())
    }

    /// Frame and encode one line as indices of length `max_len`.
    pub fn encode_line(&self, smiles: &str, line: usize) -> Result<Vec<u8>, EncodeError> {
        let len = smiles.chars().count();
        if len > self.max_smiles_len() {
            return Err(EncodeError::TooLong {
                line,
                len,
                max: self.max_smiles_len(),
            });
        }
        let mut row = Vec::with_capacity(self.max_len);
        row.push(self.start_index() as u8);
        for ch in smiles.chars() {
            if ch == START || ch == END {
                return Err(EncodeError::ReservedCharacter(line));
            }
            let i = self
                .index_of(ch)
                .ok_or(EncodeError::UnknownCharacter { ch, line })?;
            row.push(i as u8);
        }
        row.resize(self.max_len, self.end_index() as u8);
        Ok(row)
    }

    /// Strip the start character and cut at the first end character.
    pub fn decode_row(&self, row: &[u8]) -> String {
        row.iter()
            .map(|&i| self.chars[i as usize])
            .skip_while(|&c| c == START)
            .take_while(|&c| c != END)
            .collect()
    }
}

/// Sorted set of every corpus character plus `!` and `E`; `max_len` is the
/// longest line plus two.
pub fn build_vocab<I, S>(corpus: I) -> Result<TokenVocab, EncodeError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut set = BTreeSet::new();
    let mut longest = 0;
    let mut lines = 0;
    for (n, line) in corpus.into_iter().enumerate() {
        let line = line.as_ref();
        if line.contains(START) || line.contains(END) {
            return Err(EncodeError::ReservedCharacter(n));
        }
        set.extend(line.chars());
        longest = longest.max(line.chars().count());
        lines += 1;
    }
    if lines == 0 {
        return Err(EncodeError::EmptyCorpus);
    }
    set.insert(START);
    set.insert(END);
    if set.len() > u8::MAX as usize {
        return Err(EncodeError::BadVocab("more than 255 characters".into()));
    }
    TokenVocab::new(set.into_iter().collect(), longest + 2)
}

/// One-hot sequences stored as symbol indices; `to_dense` materializes the
/// `(batch, max_len, vocab)` tensor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneHotBatch {
    indices: Array2<u8>,
    vocab_size: usize,
}

impl OneHotBatch {
    pub fn from_indices(indices: Array2<u8>, vocab_size: usize) -> OneHotBatch {
        assert!(
            indices.iter().all(|&i| (i as usize) < vocab_size),
            "index outside vocabulary"
        );
        OneHotBatch {
            indices,
            vocab_size,
        }
    }

    pub fn indices(&self) -> &Array2<u8> {
        &self.indices
    }

    pub fn batch_size(&self) -> usize {
        self.indices.nrows()
    }

    pub fn seq_len(&self) -> usize {
        self.indices.ncols()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn to_dense(&self) -> Array3<f64> {
        let (b, t) = self.indices.dim();
        let mut out = Array3::zeros((b, t, self.vocab_size));
        for ((i, j), &k) in self.indices.indexed_iter() {
            out[[i, j, k as usize]] = 1.0;
        }
        out
    }

    /// Rows selected by position, in the given order.
    pub fn select(&self, rows: &[usize]) -> OneHotBatch {
        let t = self.seq_len();
        let mut out = Array2::zeros((rows.len(), t));
        for (dst, &src) in rows.iter().enumerate() {
            out.row_mut(dst).assign(&self.indices.row(src));
        }
        OneHotBatch {
            indices: out,
            vocab_size: self.vocab_size,
        }
    }

    pub fn decode(&self, vocab: &TokenVocab) -> Vec<String> {
        self.indices
            .rows()
            .into_iter()
            .map(|r| vocab.decode_row(&r.to_vec()))
            .collect()
    }
}

pub fn encode_batch<S: AsRef<str>>(
    smiles: &[S],
    vocab: &TokenVocab,
) -> Result<OneHotBatch, EncodeError> {
    let mut indices = Array2::zeros((smiles.len(), vocab.max_len()));
    for (i, s) in smiles.iter().enumerate() {
        let row = vocab.encode_line(s.as_ref(), i)?;
        for (j, v) in row.into_iter().enumerate() {
            indices[[i, j]] = v;
        }
    }
    Ok(OneHotBatch {
        indices,
        vocab_size: vocab.len(),
    })
}

/// A chunk of sequences as stored on disk. Chunk 0 is the validation set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chunk {
    pub index: u32,
    pub batch: OneHotBatch,
}

impl Chunk {
    pub fn is_validation(&self) -> bool {
        self.index == 0
    }
}

pub fn chunk_path(dir: &Path, index: u32) -> PathBuf {
    dir.join(format!("chunk_{index:05}.bin"))
}

/// Write sequences as consecutive chunk files in `dir`. Returns the paths.
pub fn write_chunks(
    dir: &Path,
    batch: &OneHotBatch,
    chunk_size: usize,
    vocab: &TokenVocab,
) -> Result<Vec<PathBuf>, EncodeError> {
    assert!(chunk_size > 0, "chunk size must be positive");
    fs::create_dir_all(dir)?;
    let n = batch.batch_size();
    let mut paths = Vec::new();
    let mut start = 0;
    let mut index = 0u32;
    while start < n {
        let end = (start + chunk_size).min(n);
        let rows: Vec<usize> = (start..end).collect();
        let chunk = Chunk {
            index,
            batch: batch.select(&rows),
        };
        let path = chunk_path(dir, index);
        write_chunk(&path, &chunk, vocab)?;
        paths.push(path);
        start = end;
        index += 1;
    }
    Ok(paths)
}

/// Layout (little-endian): magic `SMCH`, u16 version, u64 vocabulary hash,
/// u32 chunk index, u8 flags (bit 0 = validation), u32 sequences, u32
/// sequence length, u32 vocabulary size, then the one-hot rows bit-packed
/// (position-major, `vocab` bits per position, LSB first).
pub fn write_chunk(path: &Path, chunk: &Chunk, vocab: &TokenVocab) -> Result<(), EncodeError> {
    let batch = &chunk.batch;
    if batch.vocab_size() != vocab.len() || batch.seq_len() != vocab.max_len() {
        return Err(EncodeError::CorruptChunk {
            path: path.to_path_buf(),
            reason: "batch shape does not match vocabulary".into(),
        });
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(CHUNK_MAGIC)?;
    w.write_all(&CHUNK_VERSION.to_le_bytes())?;
    w.write_all(&vocab.hash().to_le_bytes())?;
    w.write_all(&chunk.index.to_le_bytes())?;
    w.write_all(&[u8::from(chunk.is_validation())])?;
    w.write_all(&(batch.batch_size() as u32).to_le_bytes())?;
    w.write_all(&(batch.seq_len() as u32).to_le_bytes())?;
    w.write_all(&(batch.vocab_size() as u32).to_le_bytes())?;

    let v = batch.vocab_size();
    let total_bits = batch.batch_size() * batch.seq_len() * v;
    let mut bits = vec![0u8; total_bits.div_ceil(8)];
    for (pos, &k) in batch.indices().iter().enumerate() {
        let bit = pos * v + k as usize;
        bits[bit / 8] |= 1 << (bit % 8);
    }
    w.write_all(&bits)?;
    w.flush()?;
    Ok(())
}

pub fn read_chunk(path: &Path, vocab: &TokenVocab) -> Result<Chunk, EncodeError> {
    let corrupt = |reason: &str| EncodeError::CorruptChunk {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    const HEADER: usize = 4 + 2 + 8 + 4 + 1 + 4 + 4 + 4;
    if bytes.len() < HEADER || &bytes[0..4] != CHUNK_MAGIC {
        return Err(corrupt("bad magic or truncated header"));
    }
    let u16_at = |o: usize| u16::from_le_bytes(bytes[o..o + 2].try_into().unwrap());
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    if u16_at(4) != CHUNK_VERSION {
        return Err(corrupt("unsupported version"));
    }
    let hash = u64_at(6);
    if hash != vocab.hash() {
        return Err(EncodeError::VocabMismatch {
            path: path.to_path_buf(),
            expected: vocab.hash(),
            found: hash,
        });
    }
    let index = u32_at(14);
    let flags = bytes[18];
    let n = u32_at(19) as usize;
    let t = u32_at(23) as usize;
    let v = u32_at(27) as usize;
    if t != vocab.max_len() || v != vocab.len() {
        return Err(corrupt("shape does not match vocabulary"));
    }
    if (flags & 1 == 1) != (index == 0) {
        return Err(corrupt("validation flag disagrees with chunk index"));
    }
    let body = &bytes[HEADER..];
    if body.len() != (n * t * v).div_ceil(8) {
        return Err(corrupt("body length does not match header"));
    }
    let mut indices = Array2::zeros((n, t));
    for (pos, slot) in indices.iter_mut().enumerate() {
        let mut found = None;
        for k in 0..v {
            let bit = pos * v + k;
            if body[bit / 8] >> (bit % 8) & 1 == 1 {
                if found.is_some() {
                    return Err(corrupt("position with more than one set bit"));
                }
                found = Some(k);
            }
        }
        *slot = found.ok_or_else(|| corrupt("position with no set bit"))? as u8;
    }
    Ok(Chunk {
        index,
        batch: OneHotBatch {
            indices,
            vocab_size: v,
        },
    })
}

/// Chunk files in `dir`, ordered by chunk index.
pub fn list_chunks(dir: &Path) -> Result<Vec<PathBuf>, EncodeError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("chunk_") && n.ends_with(".bin"))
        })
        .collect();
    paths.sort();
    Ok(paths)
}

pub fn read_chunks(dir: &Path, vocab: &TokenVocab) -> Result<Vec<Chunk>, EncodeError> {
    list_chunks(dir)?
        .iter()
        .map(|p| read_chunk(p, vocab))
        .collect()
}

/// 64-bit FNV-1a.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vocab_of_small_corpus() {
        let v = build_vocab(["CC", "CCO"]).unwrap();
        for c in ['C', 'O', '!', 'E'] {
            assert!(v.index_of(c).is_some());
        }
        assert_eq!(v.max_len(), 5);
        let single = build_vocab(["C"]).unwrap();
        assert_eq!(single.max_len(), 3);
        let row = single.encode_line("C", 0).unwrap();
        let text: String = row.iter().map(|&i| single.char_at(i as usize)).collect();
        assert_eq!(text, "!CE");
    }

    #[test]
    fn empty_corpus_is_rejected() {
        assert!(matches!(
            build_vocab(Vec::<String>::new()),
            Err(EncodeError::EmptyCorpus)
        ));
    }

    #[test]
    fn one_hot_rows_are_unit_vectors() {
        let v = build_vocab(["C"]).unwrap();
        let b = encode_batch(&["C"], &v).unwrap();
        let dense = b.to_dense();
        assert_eq!(dense.dim(), (1, 3, 3));
        let expect = [v.start_index(), v.index_of('C').unwrap(), v.end_index()];
        for (t, &k) in expect.iter().enumerate() {
            for j in 0..3 {
                assert_eq!(dense[[0, t, j]], if j == k { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn encode_errors() {
        let v = build_vocab(["CC"]).unwrap();
        assert!(matches!(
            encode_batch(&["CO"], &v),
            Err(EncodeError::UnknownCharacter { ch: 'O', line: 0 })
        ));
        assert!(matches!(
            encode_batch(&["CCC"], &v),
            Err(EncodeError::TooLong { .. })
        ));
    }

    #[test]
    fn vocab_text_round_trip() {
        let v = build_vocab(["c1ccccc1Cl", "CC(=O)N"]).unwrap();
        let again = TokenVocab::from_text(&v.to_text()).unwrap();
        assert_eq!(v, again);
        assert_eq!(v.hash(), again.hash());
    }

    #[test]
    fn chunks_round_trip_with_partial_tail() {
        let dir = tempfile::tempdir().unwrap();
        let corpus: Vec<String> = (0..25).map(|i| "C".repeat(1 + i % 7)).collect();
        let v = build_vocab(&corpus).unwrap();
        let b = encode_batch(&corpus, &v).unwrap();
        let paths = write_chunks(dir.path(), &b, 10, &v).unwrap();
        assert_eq!(paths.len(), 3);
        let chunks = read_chunks(dir.path(), &v).unwrap();
        assert!(chunks[0].is_validation());
        assert!(!chunks[1].is_validation());
        assert_eq!(chunks[2].batch.batch_size(), 5);
        let rows: Vec<usize> = (0..10).collect();
        assert_eq!(chunks[0].batch, b.select(&rows));
        let all: Vec<String> = chunks.iter().flat_map(|c| c.batch.decode(&v)).collect();
        assert_eq!(all, corpus);
    }

    #[test]
    fn corrupt_and_mismatched_chunks() {
        let dir = tempfile::tempdir().unwrap();
        let v = build_vocab(["CC", "CO"]).unwrap();
        let b = encode_batch(&["CC", "CO"], &v).unwrap();
        let paths = write_chunks(dir.path(), &b, 10, &v).unwrap();
        let other = build_vocab(["CC", "CN"]).unwrap();
        assert!(matches!(
            read_chunk(&paths[0], &other),
            Err(EncodeError::VocabMismatch { .. })
        ));
        let mut bytes = fs::read(&paths[0]).unwrap();
        bytes[0] = b'X';
        fs::write(&paths[0], &bytes).unwrap();
        assert!(matches!(
            read_chunk(&paths[0], &v),
            Err(EncodeError::CorruptChunk { .. })
        ));
    }
}
