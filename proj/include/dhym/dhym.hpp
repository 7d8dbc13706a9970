#pragma once

#include "dhym/error.hpp"
#include "dhym/parallel.hpp"
#include "dhym/grid.hpp"
#include "dhym/matrix.hpp"
#include "dhym/hessian.hpp"
#include "dhym/spectral.hpp"
#include "dhym/cone.hpp"
#include "dhym/expression.hpp"
#include "dhym/field_source.hpp"
#include "dhym/problem.hpp"
#include "dhym/compatibility.hpp"
#include "dhym/functionals.hpp"
#include "dhym/flow.hpp"
#include "dhym/elliptic.hpp"
#include "dhym/io.hpp"
#include "dhym/config.hpp"
#include "dhym/verify.hpp"
