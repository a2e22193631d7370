use std::collections::{BTreeSet, HashMap};

use super::window::WindowedSample;

/// Dense class indices for the templates seen in training. Every unseen
/// template maps to the out-of-vocabulary class, which is always the last one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    index: HashMap<usize, usize>,
    templates: Vec<usize>,
}

impl Vocabulary {
    pub fn from_samples(samples: &[WindowedSample]) -> Self {
        let ids: BTreeSet<usize> = samples
            .iter()
            .flat_map(|s| s.events.iter().copied())
            .collect();
        Self::from_template_ids(ids)
    }

    pub fn from_template_ids<I: IntoIterator<Item = usize>>(ids: I) -> Self {
        let templates: Vec<usize> = ids
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index = templates.iter().enumerate().map(|(i, &t)| (t, i)).collect();
        Vocabulary { index, templates }
    }

    /// Number of known templates, excluding the OOV class.
    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    /// Known templates plus one OOV class.
    pub fn n_classes(&self) -> usize {
        self.templates.len() + 1
    }

    pub fn oov(&self) -> usize {
        self.templates.len()
    }

    pub fn index(&self, template_id: usize) -> usize {
        self.index.get(&template_id).copied().unwrap_or(self.oov())
    }

    pub fn template_ids(&self) -> &[usize] {
        &self.templates
    }

    pub fn map_events(&self, events: &[usize]) -> Vec<usize> {
        events.iter().map(|&e| self.index(e)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VectorScheme {
    OneHot,
    Count,
    EmbeddingIds,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventVector {
    pub scheme: VectorScheme,
    pub values: Vec<f64>,
}

pub fn one_hot(class: usize, n_classes: usize) -> Vec<f64> {
    let mut v = vec![0.0; n_classes];
    v[class] = 1.0;
    v
}

/// Running event counts: entry `j` counts the classes in
/// `classes[j+1-h ..= j]` (clipped at the start).
pub fn count_vectors(classes: &[usize], n_classes: usize, history: usize) -> Vec<Vec<f64>> {
    let mut counts = vec![0.0; n_classes];
    let mut out = Vec::with_capacity(classes.len());
    for (j, &c) in classes.iter().enumerate() {
        counts[c] += 1.0;
        if history > 0 && j >= history {
            counts[classes[j - history]] -= 1.0;
        }
        out.push(counts.clone());
    }
    out
}

/// Turns a window into per-position model inputs. `history` bounds the
/// counting span of the `Count` scheme.
pub fn vectorize(
    sample: &WindowedSample,
    scheme: VectorScheme,
    vocab: &Vocabulary,
    history: usize,
) -> Vec<EventVector> {
    let classes = vocab.map_events(&sample.events);
    let n = vocab.n_classes();
    let values: Vec<Vec<f64>> = match scheme {
        VectorScheme::OneHot => classes.iter().map(|&c| one_hot(c, n)).collect(),
        VectorScheme::Count => count_vectors(&classes, n, history),
        VectorScheme::EmbeddingIds => classes.iter().map(|&c| vec![c as f64]).collect(),
    };
    values
        .into_iter()
        .map(|values| EventVector { scheme, values })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(events: Vec<usize>) -> WindowedSample {
        WindowedSample {
            events,
            anomaly: false,
            origin: 0,
        }
    }

    #[test]
    fn one_hot_example() {
        let vocab = Vocabulary::from_template_ids(0..4);
        let v = vectorize(&sample(vec![2]), VectorScheme::OneHot, &vocab, 10);
        assert_eq!(v[0].values, vec![0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(v[0].values.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn count_example() {
        let vocab = Vocabulary::from_template_ids(0..4);
        let v = vectorize(&sample(vec![1, 1, 3]), VectorScheme::Count, &vocab, 3);
        assert_eq!(v[2].values, vec![0.0, 2.0, 0.0, 1.0, 0.0]);
        // window of 2 forgets the first event
        let v = vectorize(&sample(vec![1, 1, 3]), VectorScheme::Count, &vocab, 2);
        assert_eq!(v[2].values, vec![0.0, 1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn unseen_ids_go_to_oov() {
        let vocab = Vocabulary::from_samples(&[sample(vec![7, 3, 7])]);
        assert_eq!(vocab.len(), 2);
        assert_eq!(vocab.index(3), 0);
        assert_eq!(vocab.index(7), 1);
        assert_eq!(vocab.index(99), vocab.oov());
        let v = vectorize(&sample(vec![99]), VectorScheme::OneHot, &vocab, 1);
        assert_eq!(v[0].values, vec![0.0, 0.0, 1.0]);
        let v = vectorize(&sample(vec![7, 99]), VectorScheme::EmbeddingIds, &vocab, 1);
        assert_eq!(v[1].values, vec![2.0]);
    }
}
