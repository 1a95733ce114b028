// Copyright (c) 2026 the probefuse authors.
// SPDX-License-Identifier: Apache-2.0

#include "probefuse/exr_io.hpp"

#include <ImfChannelList.h>
#include <ImfFrameBuffer.h>
#include <ImfHeader.h>
#include <ImfInputFile.h>
#include <ImfOutputFile.h>
#include <half.h>

#include <vector>

namespace probefuse {

namespace {

namespace Imf = OPENEXR_IMF_NAMESPACE;

[[noreturn]] void fail(const std::string &path, const std::string &what) {
    throw InputError("exr '" + path + "': " + what);
}

}  // namespace

void write_exr_rgb(const std::string &path, const Image3 &img,
                   ExrPrecision precision) {
    if (img.width < 1 || img.height < 1) fail(path, "empty image");
    try {
        Imf::Header header(img.width, img.height);
        header.compression() = Imf::ZIP_COMPRESSION;
        const Imf::PixelType type =
            precision == ExrPrecision::half ? Imf::HALF : Imf::FLOAT;
        const char *names[3] = {"R", "G", "B"};
        for (const char *n : names)
            header.channels().insert(n, Imf::Channel(type));

        Imf::FrameBuffer fb;
        std::vector<float> fbuf;
        std::vector<half> hbuf;
        if (precision == ExrPrecision::float32) {
            fbuf.resize(img.data.size());
            for (size_t i = 0; i < img.data.size(); ++i)
                fbuf[i] = static_cast<float>(img.data[i]);
            for (int c = 0; c < 3; ++c)
                fb.insert(names[c],
                          Imf::Slice(Imf::FLOAT,
                                     reinterpret_cast<char *>(fbuf.data() + c),
                                     sizeof(float) * 3,
                                     sizeof(float) * 3 * img.width));
        } else {
            hbuf.resize(img.data.size());
            for (size_t i = 0; i < img.data.size(); ++i)
                hbuf[i] = half(static_cast<float>(img.data[i]));
            for (int c = 0; c < 3; ++c)
                fb.insert(names[c],
                          Imf::Slice(Imf::HALF,
                                     reinterpret_cast<char *>(hbuf.data() + c),
                                     sizeof(half) * 3,
                                     sizeof(half) * 3 * img.width));
        }
        Imf::OutputFile file(path.c_str(), header);
        file.setFrameBuffer(fb);
        file.writePixels(img.height);
    } catch (const InputError &) {
        throw;
    } catch (const std::exception &e) {
        fail(path, e.what());
    }
}

Image3 read_exr_rgb(const std::string &path) {
    try {
        Imf::InputFile file(path.c_str());
        const Imath::Box2i dw = file.header().dataWindow();
        const int w = dw.max.x - dw.min.x + 1;
        const int h = dw.max.y - dw.min.y + 1;
        const Imf::ChannelList &channels = file.header().channels();
        const char *names[3] = {"R", "G", "B"};
        for (const char *n : names)
            if (!channels.findChannel(n))
                fail(path, std::string("missing channel ") + n);

        std::vector<float> buf(static_cast<size_t>(w) * h * 3, 0.0f);
        Imf::FrameBuffer fb;
        for (int c = 0; c < 3; ++c) {
            char *base = reinterpret_cast<char *>(buf.data() + c) -
                         (static_cast<ptrdiff_t>(dw.min.y) * w + dw.min.x) *
                             sizeof(float) * 3;
            fb.insert(names[c], Imf::Slice(Imf::FLOAT, base, sizeof(float) * 3,
                                           sizeof(float) * 3 * w));
        }
        file.setFrameBuffer(fb);
        file.readPixels(dw.min.y, dw.max.y);

        Image3 img(w, h);
        for (size_t i = 0; i < img.data.size(); ++i) img.data[i] = buf[i];
        return img;
    } catch (const InputError &) {
        throw;
    } catch (const std::exception &e) {
        fail(path, e.what());
    }
}

void write_exr_scalar(const std::string &path, const Image1 &img) {
    if (img.width < 1 || img.height < 1) fail(path, "empty image");
    try {
        Imf::Header header(img.width, img.height);
        header.compression() = Imf::ZIP_COMPRESSION;
        header.channels().insert("Z", Imf::Channel(Imf::FLOAT));
        std::vector<float> buf(img.data.size());
        for (size_t i = 0; i < img.data.size(); ++i)
            buf[i] = static_cast<float>(img.data[i]);
        Imf::FrameBuffer fb;
        fb.insert("Z", Imf::Slice(Imf::FLOAT,
                                  reinterpret_cast<char *>(buf.data()),
                                  sizeof(float), sizeof(float) * img.width));
        Imf::OutputFile file(path.c_str(), header);
        file.setFrameBuffer(fb);
        file.writePixels(img.height);
    } catch (const InputError &) {
        throw;
    } catch (const std::exception &e) {
        fail(path, e.what());
    }
}

Image1 read_exr_scalar(const std::string &path) {
    try {
        Imf::InputFile file(path.c_str());
        const Imath::Box2i dw = file.header().dataWindow();
        const int w = dw.max.x - dw.min.x + 1;
        const int h = dw.max.y - dw.min.y + 1;
        const Imf::ChannelList &channels = file.header().channels();

        const char *name = nullptr;
        for (const char *candidate : {"Z", "Y", "R"})
            if (channels.findChannel(candidate)) {
                name = candidate;
                break;
            }
        if (!name) {
            // fall back to the only channel present
            auto it = channels.begin();
            if (it == channels.end()) fail(path, "no channels");
            name = it.name();
            if (++it != channels.end())
                fail(path, "ambiguous channels for scalar read");
        }

        std::vector<float> buf(static_cast<size_t>(w) * h, 0.0f);
        Imf::FrameBuffer fb;
        char *base = reinterpret_cast<char *>(buf.data()) -
                     (static_cast<ptrdiff_t>(dw.min.y) * w + dw.min.x) *
                         sizeof(float);
        fb.insert(name, Imf::Slice(Imf::FLOAT, base, sizeof(float),
                                   sizeof(float) * w));
        file.setFrameBuffer(fb);
        file.readPixels(dw.min.y, dw.max.y);

        Image1 img(w, h);
        for (size_t i = 0; i < img.data.size(); ++i) img.data[i] = buf[i];
        return img;
    } catch (const InputError &) {
        throw;
    } catch (const std::exception &e) {
        fail(path, e.what());
    }
}

}  // namespace probefuse
