// Copyright 2026 The Splineformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "splineformer/activations.hpp"
#include "splineformer/attention.hpp"
#include "splineformer/compiler/compile.hpp"
#include "splineformer/encoder.hpp"
#include "splineformer/errors.hpp"
#include "splineformer/ffn.hpp"
#include "splineformer/matrix.hpp"
#include "splineformer/maxdef.hpp"
#include "splineformer/pbform.hpp"
#include "splineformer/polynomial.hpp"
#include "splineformer/rational.hpp"
#include "splineformer/verifier.hpp"
#include "splineformer/veronese.hpp"
#include "splineformer/wide_float.hpp"
