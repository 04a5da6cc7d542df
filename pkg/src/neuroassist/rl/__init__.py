"""Classification as reinforcement learning: environments, DQN, metrics."""
from .dqn import (Adam, History, HybridQNetwork, LinearQNetwork, Sgd,
                  TrainSchedule, epsilon_greedy, td_target, train_dqn)
from .env import (SWEEP_STRUCTURES, ChainEnv, ClassificationEnv,
                  RewardStructure)
from .metrics import (Metrics, confusion_matrix, evaluate, greedy_predictions,
                      reward_based_accuracy, scores_from_confusion,
                      stratified_folds)
