#pragma once

#include "secopt/adversary.hpp"
#include "secopt/bounds.hpp"
#include "secopt/config_io.hpp"
#include "secopt/epoch_gd.hpp"
#include "secopt/errors.hpp"
#include "secopt/function.hpp"
#include "secopt/hard_pair.hpp"
#include "secopt/harness.hpp"
#include "secopt/oracles.hpp"
#include "secopt/protocol.hpp"
#include "secopt/rng.hpp"
#include "secopt/stats.hpp"
#include "secopt/transcript_io.hpp"
