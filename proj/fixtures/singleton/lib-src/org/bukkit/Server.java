package org.bukkit;

import java.util.logging.Logger;

public interface Server {
    String getName();

    String getVersion();

    Logger getLogger();
}
