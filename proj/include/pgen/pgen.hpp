#pragma once

#include "pgen/codec/codec.hpp"
#include "pgen/eval/bdrate.hpp"
#include "pgen/eval/psnr.hpp"
#include "pgen/eval/report.hpp"
#include "pgen/io/checkpoint.hpp"
#include "pgen/io/csv.hpp"
#include "pgen/io/manifest.hpp"
#include "pgen/io/patch_store.hpp"
#include "pgen/io/pgm.hpp"
#include "pgen/io/pmap.hpp"
#include "pgen/io/yuv.hpp"
#include "pgen/mask.hpp"
#include "pgen/network/network.hpp"
#include "pgen/synth.hpp"
#include "pgen/training/dataset.hpp"
#include "pgen/training/trainer.hpp"
