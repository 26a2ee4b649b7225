#pragma once

#include "qx/batch.hpp"
#include "qx/corpus.hpp"
#include "qx/error.hpp"
#include "qx/export.hpp"
#include "qx/generation.hpp"
#include "qx/generator_http.hpp"
#include "qx/index.hpp"
#include "qx/reformulation.hpp"
#include "qx/retrieval.hpp"
#include "qx/scoring.hpp"
#include "qx/service.hpp"
#include "qx/session_log.hpp"
#include "qx/settings.hpp"
#include "qx/text.hpp"
#include "qx/translation.hpp"
