//! Walk corpus: the "sentences" fed to skip-gram.
//!
//! Walks are stored back to back in one `u32` buffer with an offset table,
//! which keeps a `γ·|V|·L` corpus compact.

use alloc::string::String;
use alloc::vec::Vec;

use crate::graph::NodeId;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("walk {walk} refers to node {node} outside a vocabulary of {vocab}")]
    UnknownNode { walk: usize, node: usize, vocab: usize },
    #[error("vocabulary of {0} tokens exceeds the u32 id space")]
    VocabularyTooLarge(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    tokens: Vec<String>,
    offsets: Vec<usize>,
    nodes: Vec<u32>,
    counts: Vec<u64>,
}

impl Corpus {
    /// Empty corpus over the vocabulary `tokens` (row `i` is node id `i`).
    pub fn new(tokens: Vec<String>) -> Result<Self, CorpusError> {
        if tokens.len() > u32::MAX as usize {
            return Err(CorpusError::VocabularyTooLarge(tokens.len()));
        }
        let counts = alloc::vec![0; tokens.len()];
        Ok(Corpus { tokens, offsets: alloc::vec![0], nodes: Vec::new(), counts })
    }

    pub fn from_walks<I, W>(tokens: Vec<String>, walks: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = W>,
        W: AsRef<[NodeId]>,
    {
        let mut corpus = Corpus::new(tokens)?;
        for walk in walks {
            corpus.push_walk(walk.as_ref())?;
        }
        Ok(corpus)
    }

    pub fn push_walk(&mut self, walk: &[NodeId]) -> Result<(), CorpusError> {
        let vocab = self.tokens.len();
        if let Some(&node) = walk.iter().find(|&&n| n >= vocab) {
            return Err(CorpusError::UnknownNode { walk: self.len(), node, vocab });
        }
        for &n in walk {
            self.nodes.push(n as u32);
            self.counts[n] += 1;
        }
        self.offsets.push(self.nodes.len());
        Ok(())
    }

    /// Appends all walks of `other`, which must share this vocabulary.
    pub fn append(&mut self, other: &Corpus) {
        debug_assert_eq!(self.tokens.len(), other.tokens.len());
        let base = self.nodes.len();
        self.nodes.extend_from_slice(&other.nodes);
        self.offsets.extend(other.offsets[1..].iter().map(|o| o + base));
        for (c, o) in self.counts.iter_mut().zip(&other.counts) {
            *c += o;
        }
    }

    /// Number of walks.
    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn walk(&self, i: usize) -> &[u32] {
        &self.nodes[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn walks(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        (0..self.len()).map(move |i| self.walk(i))
    }

    pub fn token_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.tokens.len()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Occurrences of every vocabulary entry over all walks.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.tokens
    }

    pub fn heap_bytes(&self) -> usize {
        self.nodes.len() * 4 + self.offsets.len() * 8 + self.counts.len() * 8
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn tokens(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn counts_track_occurrences() {
        let c = Corpus::from_walks(tokens(3), [vec![0, 1, 0], vec![2]]).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.counts(), &[2, 1, 1]);
        assert_eq!(c.walk(0), &[0, 1, 0]);
        assert_eq!(c.token_count(), 4);
    }

    #[test]
    fn rejects_unknown_nodes() {
        let err = Corpus::from_walks(tokens(2), [vec![0, 5]]).unwrap_err();
        assert_eq!(err, CorpusError::UnknownNode { walk: 0, node: 5, vocab: 2 });
    }

    #[test]
    fn append_concatenates() {
        let mut a = Corpus::from_walks(tokens(3), [vec![0, 1]]).unwrap();
        let b = Corpus::from_walks(tokens(3), [vec![2], vec![1, 2]]).unwrap();
        a.append(&b);
        let all = Corpus::from_walks(tokens(3), [vec![0, 1], vec![2], vec![1, 2]]).unwrap();
        assert_eq!(a, all);
    }
}
