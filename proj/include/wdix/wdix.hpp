#pragma once

#include "wdix/error.hpp"
#include "wdix/config.hpp"
#include "wdix/dataset.hpp"
#include "wdix/wdi_client.hpp"
#include "wdix/panel.hpp"
#include "wdix/smoothing.hpp"
#include "wdix/features.hpp"
#include "wdix/variation.hpp"
#include "wdix/diagnostics.hpp"
#include "wdix/pipeline.hpp"
#include "wdix/plots.hpp"
#include "wdix/service.hpp"
