"""Emotion-controlled response generation by simulated annealing over word edits."""
from .anneal import (SaConfig, SaTrace, StepRecord, EditOp, acceptance_probability, apply_edit,
                     gibbs_word_distribution, make_rng, run_sa, sa_step, temperature)
from .corpus import (DialoguePair, EmotionLabel, Vocabulary, build_vocabulary, detokenize,
                     load_corpus, tokenize)
from .decode import DbsConfig, Hypothesis, beam_search, diverse_beam_search, initial_response
from .emotion import EmotionClassifier, classify, emotion_posterior, train_emotion
from .evaluation import (EmbeddingTable, MetricsReport, bleu_n, distinct_n, embedding_metrics,
                         emotion_accuracy, sweep_alpha)
from .lm import (ConditionalScorer, NGramModel, TranslationTable, conditional_logprob,
                 train_ibm1, train_ngram)
from .objective import Objective, ObjectiveConfig, ScoredCandidate
from .pipeline import Models, Pipeline, train_models

__version__ = "0.1.0"
