# %% [markdown]
# # The three classifier families
#
# A one-vs-one kernel SVM trained by SMO, the six ReLU MLP shapes V1..V6
# and a small text CNN, all written in numpy.

# %%
import numpy as np

from tweetsat.models import (
    ANN_CONFIGS,
    CnnConfig,
    CnnModel,
    MlpModel,
    SvmConfig,
    cnn_train,
    gradient_check,
    mlp_predict,
    mlp_train,
    svm_predict,
    svm_train,
)

rng = np.random.default_rng(0)
centres = rng.normal(scale=2.0, size=(3, 7))
X = np.vstack([c + rng.normal(scale=0.6, size=(40, 7)) for c in centres])
y = np.repeat(np.arange(3), 40)

# %%
svm = svm_train(X, y, SvmConfig(C=10.0))
print("SVM train accuracy:", np.mean(svm_predict(svm, X) == y))

# %%
for name in sorted(ANN_CONFIGS):
    print(name, ANN_CONFIGS[name].hidden_sizes)

model = mlp_train(X, y, ANN_CONFIGS["V2"])
print("V2 train accuracy:", np.mean(mlp_predict(model, X)[0] == y))
print("first and last epoch loss:", model.loss_trace[0], model.loss_trace[-1])

# %% [markdown]
# Backprop is checked against central finite differences.

# %%
m = MlpModel.initialize(ANN_CONFIGS["V4"], 7)
_, grads = m.loss_and_grads(X[:8], y[:8])
print("V4 gradient check:", gradient_check(m.params, lambda: m.loss(X[:8], y[:8]), grads))

# %%
cfg = CnnConfig(vocab_size=50, max_len=20, epochs=3, batch_size=16, seed=1)
seqs = rng.integers(2, 50, size=(60, 20))
labels = rng.integers(0, 3, size=60)
cnn = cnn_train(seqs, labels, cfg)
print("CNN loss trace:", np.round(cnn.loss_trace, 4))

cm = CnnModel.initialize(cfg)
_, g = cm.loss_and_grads(seqs[:5], labels[:5], train=False)
print("CNN gradient check:", gradient_check(cm.params, lambda: cm.loss(seqs[:5], labels[:5]), g, epsilon=1e-4))
