//! Embedding spaces: training, storage and the word2vec text format.

mod io;
mod sampler;
mod space;
mod train;

pub use io::{load_embeddings, load_embeddings_file, save_embeddings, save_embeddings_file};
pub use sampler::{UnigramSampler, UNIGRAM_POWER};
pub use space::EmbeddingSpace;
pub use train::{train_sgns, train_sgns_with_report, SgnsConfig, TrainingReport};
