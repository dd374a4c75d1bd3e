#include "tomo/recon.hpp"

#include "tomo/errors.hpp"

namespace tomo {

void SolverParams::validate() const {
    if (max_iters < 1) throw ConfigError("max_iters must be at least 1");
    if (!(tol > 0.0)) throw ConfigError("tol must be positive");
    if (!(relax > 0.0 && relax < 2.0)) throw ConfigError("relax must lie in (0, 2)");
    if (lambda1 < 0.0) throw ConfigError("lambda1 must be non-negative");
}

const char* method_name(MethodId id) {
    switch (id) {
        case MethodId::FBP: return "fbp";
        case MethodId::CS_DCT: return "cs-dct";
        case MethodId::CS_HAAR: return "cs-haar";
        case MethodId::ART: return "art";
        case MethodId::SART: return "sart";
        case MethodId::SIRT: return "sirt";
    }
    throw ConfigError("unknown reconstruction method");
}

MethodId parse_method(const std::string& name) {
    if (name == "fbp") return MethodId::FBP;
    if (name == "cs-dct" || name == "cs_dct" || name == "cs") return MethodId::CS_DCT;
    if (name == "cs-haar" || name == "cs_haar") return MethodId::CS_HAAR;
    if (name == "art") return MethodId::ART;
    if (name == "sart") return MethodId::SART;
    if (name == "sirt") return MethodId::SIRT;
    throw ConfigError("unknown reconstruction method: " + name);
}

Image reconstruct_baseline(MethodId id, const Sinogram& sino, int width, int height,
                           const SolverParams& params) {
    switch (id) {
        case MethodId::FBP: return fbp(sino, width, height, FilterKind::RamLak);
        case MethodId::CS_DCT: return cs_reconstruct(sino, width, height, BasisKind::DCT2, params);
        case MethodId::CS_HAAR:
            return cs_reconstruct(sino, width, height, BasisKind::HAAR2, params);
        case MethodId::ART: return art(sino, width, height, params);
        case MethodId::SART: return sart(sino, width, height, params);
        case MethodId::SIRT: return sirt(sino, width, height, params);
    }
    throw ConfigError("unknown reconstruction method");
}

} // namespace tomo
