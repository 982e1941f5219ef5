from .weighting import (
    KernelFamily,
    KernelSpec,
    eval_kernel,
    kernel_weights,
    knn_bandwidth,
    weight_matrix,
)
