#ifndef ADHINT_ADHINT_HPP_
#define ADHINT_ADHINT_HPP_

#include "adhint/adaptive_hint.hpp"
#include "adhint/advantage.hpp"
#include "adhint/config.hpp"
#include "adhint/corpus_io.hpp"
#include "adhint/errors.hpp"
#include "adhint/features.hpp"
#include "adhint/gradient_modulation.hpp"
#include "adhint/policy.hpp"
#include "adhint/report_io.hpp"
#include "adhint/rng.hpp"
#include "adhint/rollout.hpp"
#include "adhint/task_world.hpp"
#include "adhint/trainer.hpp"
#include "adhint/training_run.hpp"

#endif  // ADHINT_ADHINT_HPP_
